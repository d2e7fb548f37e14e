#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "flock/flow_index.hpp"
#include "flock/search.hpp"

namespace flock {

// Number of hypotheses of size <= k over n candidates, the empty one included.
// Saturates at UINT64_MAX.
std::uint64_t sherlock_scan_count(std::uint64_t n, int k);

struct SherlockOptions {
  int max_failures = 2;
  bool use_jle = true;
  double budget = 1e8;  // refuse to start above this many hypotheses
  // Stop after this many hypotheses (0 = no limit); used to time a prefix of
  // an over-budget scan.
  std::uint64_t scan_limit = 0;
};

struct SherlockResult {
  Hypothesis hypothesis;
  double log_likelihood = 0.0;
  std::uint64_t hypotheses_scanned = 0;
  bool truncated = false;
};

// Exhaustive maximum over hypotheses of size <= K, prior included.
SherlockResult sherlock_search(const FlowIndex& index, const SearchSpace& space,
                               const ModelParams& params, const SherlockOptions& options);
SherlockResult sherlock_search(const FlowIndex& index, const SearchSpace& space,
                               const ModelParams& params, std::span<const double> x,
                               const SherlockOptions& options);

struct VoteTable {
  std::vector<double> score;  // by component id
  double max_score = 0.0;
};

// Every flow with r >= 1 spreads one vote evenly over the links of its path.
VoteTable vote_scores(std::span<const SelectedFlow> flows, const Topology& topo);
// Links scoring at least threshold * max_score.
Hypothesis vote007(std::span<const SelectedFlow> flows, const Topology& topo, double threshold);
Hypothesis vote007(const VoteTable& table, double threshold);

}  // namespace flock
