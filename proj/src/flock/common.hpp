#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace flock {

// Component ids share one namespace across devices and links.
using ComponentId = std::uint32_t;
inline constexpr ComponentId kNoComponent = 0xffffffffu;

enum class ErrorCode {
  InvalidArgument = 1,
  Parse,
  Io,
  NoUsableInput,
  BudgetExceeded,
  Infeasible,
  Internal,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace flock
