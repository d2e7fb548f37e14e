#include "flock/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <ostream>

namespace flock {

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> v;
  if (n == 1) return {lo};
  for (std::size_t i = 0; i < n; ++i) v.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1));
  return v;
}

std::vector<double> logspace(double lo, double hi, std::size_t n) {
  if (!(lo > 0 && hi > 0)) fail(ErrorCode::InvalidArgument, "logspace needs positive bounds");
  auto v = linspace(std::log(lo), std::log(hi), n);
  for (auto& x : v) x = std::exp(x);
  if (n > 1) {
    v.front() = lo;
    v.back() = hi;
  }
  return v;
}

ParamGrid default_grid() {
  ParamGrid g;
  g.p_g = logspace(1e-4, 5e-2, 8);
  g.p_b = logspace(5e-3, 0.2, 8);
  g.rho = {1e-4, 1e-3, 1e-2};
  g.vote_threshold = linspace(0.05, 1.0, 20);
  return g;
}

std::vector<ModelParams> ParamGrid::expand(Scheme scheme, const ModelParams& base) const {
  std::vector<ModelParams> out;
  if (scheme == Scheme::Vote007) {
    for (double t : vote_threshold) {
      ModelParams p = base;
      p.vote_threshold = t;
      out.push_back(p);
    }
    return out;
  }
  for (double g : p_g) {
    for (double b : p_b) {
      if (!(b > g)) continue;
      for (double r : rho) {
        ModelParams p = base;
        p.p_g = g;
        p.p_b = b;
        p.rho_link = r;
        out.push_back(p);
      }
    }
  }
  return out;
}

std::vector<ParetoPoint> evaluate_grid(Scheme scheme, const ParamGrid& grid, const TrainingSet& training,
                                       InputKind kind, const ModelParams& base, const InferOptions& options) {
  if (training.traces.empty()) fail(ErrorCode::InvalidArgument, "calibration needs at least one training trace");
  if (!training.topo) fail(ErrorCode::InvalidArgument, "calibration needs a topology");
  const Topology& topo = *training.topo;
  const auto points = grid.expand(scheme, base);
  if (points.empty()) fail(ErrorCode::InvalidArgument, "empty parameter grid");

  Router router(topo);
  std::shared_ptr<const ReducedTopology> reduced;
  if (kind == InputKind::P && options.reduce_passive) {
    reduced = std::make_shared<const ReducedTopology>(reduced_topology(topo));
  }
  // Flow indexes do not depend on the parameters, so each trace is prepared once.
  std::vector<Problem> problems;
  problems.reserve(training.traces.size());
  for (const auto* tr : training.traces) {
    problems.push_back(prepare(tr->records, topo, router, kind, base, options, reduced));
  }

  std::vector<ParetoPoint> out;
  out.reserve(points.size());
  for (const auto& p : points) {
    p.validate();
    std::vector<EvalReport> reports;
    for (std::size_t i = 0; i < problems.size(); ++i) {
      const auto res = solve(problems[i], topo, scheme, p, options);
      reports.push_back(score(res.hypothesis, training.traces[i]->truth, topo, problems[i].reduced.get()));
    }
    const auto agg = aggregate(reports);
    // Class-level runs cannot beat 1/|class| at link level, so they are
    // judged on classes.
    if (reduced && reduced->nontrivial()) {
      out.push_back({p, agg.mean_class_precision, agg.mean_class_recall});
    } else {
      out.push_back({p, agg.mean_precision, agg.mean_recall});
    }
  }
  return out;
}

std::vector<ParetoPoint> pareto_frontier(std::span<const ParetoPoint> points) {
  std::vector<ParetoPoint> out;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& a = points[i];
    bool dominated = false;
    for (std::size_t j = 0; j < points.size() && !dominated; ++j) {
      if (i == j) continue;
      const auto& b = points[j];
      const bool ge = b.precision >= a.precision && b.recall >= a.recall;
      const bool gt = b.precision > a.precision || b.recall > a.recall;
      // Exact duplicates keep the earliest grid point.
      dominated = ge && (gt || j < i);
    }
    if (!dominated) out.push_back(a);
  }
  std::stable_sort(out.begin(), out.end(), [](const ParetoPoint& x, const ParetoPoint& y) {
    return x.precision > y.precision;
  });
  return out;
}

std::vector<ParetoPoint> grid_search(Scheme scheme, const ParamGrid& grid, const TrainingSet& training,
                                     InputKind kind, const ModelParams& base, const InferOptions& options) {
  const auto all = evaluate_grid(scheme, grid, training, kind, base, options);
  return pareto_frontier(all);
}

OperatingPoint choose_operating_point(std::span<const ParetoPoint> frontier, double p_start, double min_recall,
                                      double step) {
  if (frontier.empty()) fail(ErrorCode::InvalidArgument, "empty frontier");
  if (!(step > 0)) fail(ErrorCode::InvalidArgument, "step must be positive");
  for (double bar = p_start;; bar -= step) {
    const ParetoPoint* best = nullptr;
    for (const auto& q : frontier) {
      if (!(q.precision > bar)) continue;
      if (!best || q.recall > best->recall) best = &q;
    }
    if (best && best->recall >= min_recall) return {*best, bar, false};
    if (bar <= 0.0) break;
  }
  const ParetoPoint* best = &frontier.front();
  for (const auto& q : frontier) {
    if (q.recall > best->recall) best = &q;
  }
  return {*best, 0.0, true};
}

void write_frontier_csv(std::ostream& out, std::span<const ParetoPoint> frontier) {
  out << "# schema-version 1\n";
  out << "p_g,p_b,rho_link,vote_threshold,precision,recall\n";
  for (const auto& q : frontier) {
    out << format_double(q.params.p_g) << ',' << format_double(q.params.p_b) << ','
        << format_double(q.params.rho_link) << ',' << format_double(q.params.vote_threshold) << ','
        << format_double(q.precision) << ',' << format_double(q.recall) << '\n';
  }
}

}  // namespace flock
