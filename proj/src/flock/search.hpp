#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "flock/flow_index.hpp"
#include "flock/model.hpp"

namespace flock {

// Delta[c] = LL(H + c) - LL(H), prior included. Components that are not
// candidates, or already in H, hold -infinity.
using DeltaArray = std::vector<long double>;

struct SearchCounters {
  std::uint64_t flows_visited = 0;     // flow counter rebuilds
  std::uint64_t entries_updated = 0;   // delta entries touched
  std::uint64_t hypotheses_scanned = 0;
};

// State carried between greedy iterations.
struct DeltaState {
  DeltaArray delta;
  std::vector<std::uint8_t> in_h;  // by component id
  Hypothesis h;
};

DeltaState compute_initial_delta(const FlowIndex& index, const SearchSpace& space,
                                 const ModelParams& params, std::span<const double> x,
                                 SearchCounters* counters = nullptr);

// Adds l_star to the state's hypothesis and refreshes delta for every flow
// crossing l_star.
void update_delta(DeltaState& state, ComponentId l_star, const FlowIndex& index,
                  std::span<const double> x, SearchCounters* counters = nullptr);

// Search comparisons treat values this close as ties, so that summation
// order differences between equivalent evaluations never change a choice.
inline bool clearly_greater(long double a, long double b) {
  const long double mag = b < 0 ? -b : b;
  return a > b + (1e-7L + 1e-12L * mag);
}

// Smallest id among the maximal entries (ties within a small tolerance).
ComponentId argmax_delta(const DeltaArray& delta, std::uint64_t* scanned = nullptr);

struct IterationRecord {
  std::uint32_t iteration = 0;
  ComponentId component = kNoComponent;
  double delta = 0.0;
  double cumulative_ll = 0.0;
  std::uint64_t elapsed_us = 0;
  std::uint64_t hypotheses_scanned = 0;
  std::uint64_t flows_visited = 0;
};

struct SearchResult {
  Hypothesis hypothesis;
  std::vector<ComponentId> order;
  std::vector<IterationRecord> iterations;
  SearchCounters counters;
  double log_likelihood = 0.0;
};

struct GreedyOptions {
  bool use_jle = true;
  std::size_t max_iterations = static_cast<std::size_t>(-1);
};

SearchResult greedy_search(const FlowIndex& index, const SearchSpace& space,
                           const ModelParams& params, const GreedyOptions& options = {});
// Same, with log ratios precomputed (calibration reuses one index).
SearchResult greedy_search(const FlowIndex& index, const SearchSpace& space,
                           const ModelParams& params, std::span<const double> x,
                           const GreedyOptions& options);

void write_iterations_csv(std::ostream& out, const SearchResult& result);

}  // namespace flock
