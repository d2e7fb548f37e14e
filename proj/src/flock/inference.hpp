#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "flock/baselines.hpp"
#include "flock/flow_index.hpp"
#include "flock/search.hpp"
#include "flock/telemetry.hpp"

namespace flock {

enum class Scheme : std::uint8_t { Flock, Vote007, Sherlock };

const char* to_string(Scheme s);
Scheme parse_scheme(const std::string& text);

struct InferOptions {
  bool use_jle = true;
  bool include_devices = true;
  // Passive-only input is localized on the equivalence-class reduction.
  bool reduce_passive = true;
  // Replace (t, r) by the RTT-threshold indicator before selection.
  bool per_flow = false;
  double sherlock_budget = 1e8;
};

// The prepared inputs of one inference run on one trace.
struct Problem {
  InputKind kind = InputKind::INT;
  std::vector<SelectedFlow> flows;
  SearchSpace space;
  std::unique_ptr<FlowIndex> index;
  // Set when the run works on equivalence classes.
  std::shared_ptr<const ReducedTopology> reduced;
};

Problem prepare(std::span<const FlowRecord> records, const Topology& topo, const Router& router,
                InputKind kind, const ModelParams& params, const InferOptions& options = {},
                std::shared_ptr<const ReducedTopology> reduced = nullptr);

struct InferResult {
  Hypothesis hypothesis;
  // For class-level runs: the failed classes, hypothesis holding all members.
  bool class_level = false;
  std::vector<std::uint32_t> classes;
  SearchResult search;
  std::uint64_t hypotheses_scanned = 0;
};

InferResult solve(const Problem& problem, const Topology& topo, Scheme scheme, const ModelParams& params,
                  const InferOptions& options = {});
InferResult solve(const Problem& problem, const Topology& topo, Scheme scheme, const ModelParams& params,
                  std::span<const double> x, const InferOptions& options);

// select_input -> index -> search.
InferResult infer(std::span<const FlowRecord> records, const Topology& topo, InputKind kind,
                  const ModelParams& params, const InferOptions& options = {}, Scheme scheme = Scheme::Flock);

}  // namespace flock
