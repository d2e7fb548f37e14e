#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "flock/inference.hpp"
#include "flock/model.hpp"
#include "flock/telemetry.hpp"
#include "flock/topology.hpp"

namespace flock {

struct EvalReport {
  double precision = 1.0;
  double recall = 1.0;
  double fscore = 1.0;
  std::size_t predicted = 0;
  std::size_t correct = 0;        // predicted components judged correct
  std::size_t failure_units = 0;  // standalone links plus failed devices
  double recalled = 0.0;          // recall mass over failure units

  // Equivalence-class view, filled when classes are supplied.
  bool has_classes = false;
  double class_precision = 1.0;
  double class_recall = 1.0;
  // Best link-level precision any class-level answer can reach.
  double precision_bound = 1.0;
};

double fscore(double precision, double recall);

// Links of a failed device count as correct predictions; a failed device is
// recalled fully when predicted and fractionally through its failed links.
EvalReport score(const Hypothesis& predicted, const GroundTruth& truth, const Topology& topo,
                 const ReducedTopology* classes = nullptr);

struct AggregateReport {
  std::size_t traces = 0;
  double mean_precision = 1.0;
  double mean_recall = 1.0;
  double fscore_of_means = 1.0;
  double mean_fscore = 1.0;
  double mean_class_precision = 1.0;
  double mean_class_recall = 1.0;
  double mean_precision_bound = 1.0;
};

AggregateReport aggregate(std::span<const EvalReport> reports);

void write_eval_csv(std::ostream& out, std::span<const EvalReport> reports, const AggregateReport& total);

struct BenchEntry {
  std::string scheme;  // e.g. "greedy+jle"
  InputKind kind = InputKind::INT;
  double median_ms = 0.0;
  std::size_t runs = 0;
  std::uint64_t hypotheses_scanned = 0;
  bool estimated = false;  // scan too large; time extrapolated from a prefix
  Hypothesis hypothesis;
};

struct BenchReport {
  std::size_t n = 0;  // candidate components
  std::size_t m = 0;  // flows
  std::size_t T = 0;
  std::size_t D = 0;
  int threads = 1;
  std::vector<BenchEntry> entries;
  std::vector<IterationRecord> iterations;  // greedy+jle iteration trace
};

struct BenchOptions {
  std::vector<std::string> schemes{"greedy+jle", "greedy", "sherlock+jle", "sherlock", "vote007"};
  int runs = 3;
  double sherlock_budget = 1e8;
  // Hypotheses timed before extrapolating an over-budget Sherlock scan.
  std::uint64_t sherlock_sample = 200000;
};

// Times each scheme on one trace. Median over `runs` timed runs after an
// untimed warm-up run.
BenchReport bench(std::span<const FlowRecord> records, const Topology& topo, InputKind kind,
                  const ModelParams& params, const BenchOptions& options = {});

void write_bench_csv(std::ostream& out, const BenchReport& report);

}  // namespace flock
