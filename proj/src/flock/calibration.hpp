#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "flock/evaluation.hpp"
#include "flock/inference.hpp"

namespace flock {

std::vector<double> linspace(double lo, double hi, std::size_t n);
std::vector<double> logspace(double lo, double hi, std::size_t n);

struct ParamGrid {
  std::vector<double> p_g;
  std::vector<double> p_b;
  std::vector<double> rho;
  std::vector<double> vote_threshold;

  // Grid points in a fixed order; p_b <= p_g pairs are skipped.
  std::vector<ModelParams> expand(Scheme scheme, const ModelParams& base) const;
};

ParamGrid default_grid();

struct ParetoPoint {
  ModelParams params;
  double precision = 0.0;
  double recall = 0.0;

  friend bool operator==(const ParetoPoint&, const ParetoPoint&) = default;
};

// Training traces share the topology; each carries ground truth.
struct TrainingSet {
  const Topology* topo = nullptr;
  std::vector<const Trace*> traces;
};

// Mean precision/recall of every grid point, in grid order. Class-level
// (reduced passive) runs report class precision/recall.
std::vector<ParetoPoint> evaluate_grid(Scheme scheme, const ParamGrid& grid, const TrainingSet& training,
                                       InputKind kind, const ModelParams& base, const InferOptions& options = {});

// Mutually non-dominated points, precision descending.
std::vector<ParetoPoint> pareto_frontier(std::span<const ParetoPoint> points);

std::vector<ParetoPoint> grid_search(Scheme scheme, const ParamGrid& grid, const TrainingSet& training,
                                     InputKind kind, const ModelParams& base, const InferOptions& options = {});

struct OperatingPoint {
  ParetoPoint point;
  double threshold = 0.0;  // the precision bar it cleared
  bool fallback = false;   // no point reached min_recall at any bar
};

OperatingPoint choose_operating_point(std::span<const ParetoPoint> frontier, double p_start = 0.98,
                                      double min_recall = 0.25, double step = 0.05);

void write_frontier_csv(std::ostream& out, std::span<const ParetoPoint> frontier);

}  // namespace flock
