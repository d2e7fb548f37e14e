#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "flock/common.hpp"
#include "flock/topology.hpp"

namespace flock {

enum class FlowKind : std::uint8_t { ActiveProbe, Application };

struct FlowRecord {
  ComponentId src = kNoComponent;
  ComponentId dst = kNoComponent;  // a host, or a switch for probes
  std::uint64_t packets_sent = 0;  // t
  std::uint64_t bad_packets = 0;   // r
  FlowKind kind = FlowKind::Application;
  std::optional<Path> path;
  std::optional<double> rtt_ms;

  friend bool operator==(const FlowRecord&, const FlowRecord&) = default;
};

struct FailedComponent {
  ComponentId id = kNoComponent;
  double drop_rate = 0.0;
  // Set when the link failed as part of a device failure.
  ComponentId parent = kNoComponent;

  friend bool operator==(const FailedComponent&, const FailedComponent&) = default;
};

struct GroundTruth {
  std::vector<FailedComponent> failures;

  friend bool operator==(const GroundTruth&, const GroundTruth&) = default;
};

struct TraceHeader {
  std::uint64_t topo_checksum = 0;
  std::uint64_t seed = 0;
  std::string scenario = "none";

  friend bool operator==(const TraceHeader&, const TraceHeader&) = default;
};

// Ground truth sits beside the records; inference entry points only ever
// receive the record list, never a whole Trace.
struct Trace {
  TraceHeader header;
  std::vector<FlowRecord> records;
  GroundTruth truth;

  friend bool operator==(const Trace&, const Trace&) = default;
};

void write_trace(std::ostream& out, const Trace& trace);
void save_trace(const std::string& path, const Trace& trace);
// Validates ids, r <= t, path membership in the ECMP set and the topology
// checksum. Errors carry the offending line number.
Trace parse_trace(std::istream& in, const Topology& topo);
Trace load_trace(const std::string& path, const Topology& topo);

enum class InputKind : std::uint8_t { A1, A2, P, INT, A1_P, A2_P, A1_A2_P };

const char* to_string(InputKind kind);
InputKind parse_input_kind(const std::string& text);
bool uses_passive_paths(InputKind kind);

// A flow as seen by inference: counts plus the paths it may have taken.
struct SelectedFlow {
  ComponentId src = kNoComponent;
  ComponentId dst = kNoComponent;
  std::uint64_t t = 0;
  std::uint64_t r = 0;
  std::shared_ptr<const PathSet> paths;
  std::uint32_t record = 0;  // index into the source record list
};

std::vector<SelectedFlow> select_input(std::span<const FlowRecord> records, InputKind kind,
                                       const Router& router);

// t := 1, r := [rtt_ms > threshold].
std::vector<FlowRecord> per_flow_binarize(std::span<const FlowRecord> records,
                                          double rtt_threshold_ms);

// Keeps each application record with probability `keep`; probes are kept.
std::vector<FlowRecord> downsample(std::span<const FlowRecord> records, double keep,
                                   std::uint64_t seed);

std::string format_double(double v);

}  // namespace flock
