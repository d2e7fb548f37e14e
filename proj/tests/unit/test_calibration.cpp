#include <random>
#include <sstream>

#include "doctest.h"
#include "flock/calibration.hpp"
#include "flock/simulator.hpp"

using namespace flock;

namespace {

ParetoPoint pt(double p, double r, double tag = 0.0) {
  ParetoPoint q;
  q.precision = p;
  q.recall = r;
  q.params.vote_threshold = tag;
  return q;
}

bool dominates(const ParetoPoint& a, const ParetoPoint& b) {
  return a.precision >= b.precision && a.recall >= b.recall && (a.precision > b.precision || a.recall > b.recall);
}

}  // namespace

TEST_CASE("grid spacing") {
  auto l = linspace(0.0, 1.0, 5);
  REQUIRE(l.size() == 5);
  CHECK(l[1] == 0.25);
  CHECK(l[4] == 1.0);
  CHECK(linspace(3.0, 9.0, 1) == std::vector<double>{3.0});
  auto g = logspace(1e-4, 1e-1, 4);
  REQUIRE(g.size() == 4);
  CHECK(g[0] == 1e-4);
  CHECK(g[1] == doctest::Approx(1e-3));
  CHECK(g[2] == doctest::Approx(1e-2));
  CHECK(g[3] == 1e-1);
  CHECK_THROWS_AS(logspace(0.0, 1.0, 3), Error);
}

TEST_CASE("default grid expansion") {
  const auto g = default_grid();
  CHECK(g.p_g.size() == 8);
  CHECK(g.p_b.size() == 8);
  CHECK(g.rho.size() == 3);
  const auto pts = g.expand(Scheme::Flock, ModelParams{});
  std::size_t pairs = 0;
  for (double a : g.p_g) {
    for (double b : g.p_b) pairs += b > a;
  }
  CHECK(pts.size() == pairs * 3);
  for (const auto& p : pts) {
    CHECK(p.p_b > p.p_g);
    CHECK_NOTHROW(p.validate());
  }
  const auto votes = g.expand(Scheme::Vote007, ModelParams{});
  CHECK(votes.size() == g.vote_threshold.size());
  CHECK(votes.back().vote_threshold == 1.0);
  CHECK(g.expand(Scheme::Sherlock, ModelParams{}).size() == pts.size());
}

TEST_CASE("pareto frontier") {
  std::vector<ParetoPoint> pts{pt(0.9, 0.5, 1), pt(0.8, 0.9, 2), pt(0.7, 0.6, 3), pt(0.9, 0.5, 4), pt(1.0, 0.1, 5),
                               pt(0.8, 0.9, 6)};
  auto f = pareto_frontier(pts);
  REQUIRE(f.size() == 3);
  CHECK(f[0].params.vote_threshold == 5);
  CHECK(f[1].params.vote_threshold == 1);  // earliest duplicate kept
  CHECK(f[2].params.vote_threshold == 2);
  CHECK(pareto_frontier(std::vector<ParetoPoint>{pt(0.3, 0.3)}).size() == 1);
  CHECK(pareto_frontier(std::vector<ParetoPoint>{}).empty());

  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<ParetoPoint> cloud;
    for (int i = 0; i < 40; ++i) cloud.push_back(pt(std::round(u(rng) * 20) / 20, std::round(u(rng) * 20) / 20, i));
    auto front = pareto_frontier(cloud);
    REQUIRE_FALSE(front.empty());
    for (std::size_t i = 0; i < front.size(); ++i) {
      if (i > 0) CHECK(front[i - 1].precision >= front[i].precision);
      for (std::size_t j = 0; j < front.size(); ++j) {
        if (i != j) CHECK_FALSE(dominates(front[i], front[j]));
      }
      for (const auto& q : cloud) CHECK_FALSE(dominates(q, front[i]));
    }
    // everything left out is dominated or duplicates a kept point
    for (const auto& q : cloud) {
      bool covered = false;
      for (const auto& k : front) {
        covered = covered || dominates(k, q) || (k.precision == q.precision && k.recall == q.recall);
      }
      CHECK(covered);
    }
  }
}

TEST_CASE("operating point selection") {
  std::vector<ParetoPoint> a{pt(0.99, 0.8), pt(0.95, 0.95)};
  auto op = choose_operating_point(a);
  CHECK(op.point.precision == 0.99);
  CHECK(op.point.recall == 0.8);
  CHECK(op.threshold == doctest::Approx(0.98));
  CHECK_FALSE(op.fallback);

  std::vector<ParetoPoint> b{pt(0.97, 0.9)};
  op = choose_operating_point(b);
  CHECK(op.point.precision == 0.97);
  CHECK(op.threshold == doctest::Approx(0.93));

  std::vector<ParetoPoint> zero{pt(1.0, 0.0, 1), pt(0.5, 0.0, 2)};
  op = choose_operating_point(zero);
  CHECK(op.fallback);
  CHECK(op.point.recall == 0.0);

  // recall too low at the first bar
  std::vector<ParetoPoint> c{pt(0.99, 0.1), pt(0.9, 0.5)};
  op = choose_operating_point(c);
  CHECK(op.point.precision == 0.9);
  CHECK(op.threshold < 0.9);
  CHECK(op.point.precision > op.threshold);

  CHECK_THROWS_AS(choose_operating_point(std::vector<ParetoPoint>{}), Error);
  CHECK_THROWS_AS(choose_operating_point(a, 0.98, 0.25, 0.0), Error);
}

TEST_CASE("operating point properties") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<ParetoPoint> cloud;
    for (int i = 0; i < 12; ++i) cloud.push_back(pt(u(rng), u(rng), i));
    const auto front = pareto_frontier(cloud);
    double last_precision = -1.0;
    // starts a whole number of steps apart share their bars
    for (double start : {0.33, 0.48, 0.73, 0.88, 0.93, 0.98}) {
      const auto op = choose_operating_point(front, start);
      bool on = false;
      for (const auto& q : front) on = on || q.params == op.point.params;
      CHECK(on);
      if (!op.fallback) {
        CHECK(op.point.precision > op.threshold);
        CHECK(op.point.recall >= 0.25);
        CHECK(op.point.precision >= last_precision);
        last_precision = op.point.precision;
      }
    }
  }
}

TEST_CASE("grid search on simulated traces") {
  auto topo = build_fat_tree(4, 2);
  std::vector<Trace> traces;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    FailureScenario sc;
    sc.random_failures = 2;
    SimConfig cfg;
    cfg.app_flows = 5000;
    cfg.probes_per_host = 20;
    cfg.seed = seed;
    traces.push_back(simulate(topo, sc, TrafficPattern{}, cfg));
  }
  TrainingSet ts;
  ts.topo = &topo;
  for (const auto& t : traces) ts.traces.push_back(&t);

  ParamGrid grid;
  grid.p_g = {1e-4, 1e-3};
  grid.p_b = {5e-3, 2e-2};
  grid.rho = {1e-3};
  grid.vote_threshold = {0.5, 1.0};
  const auto all = evaluate_grid(Scheme::Flock, grid, ts, InputKind::INT, ModelParams{});
  REQUIRE(all.size() == 4);
  // each point is the mean of per-trace scores
  for (const auto& q : all) {
    double p = 0;
    for (const auto& t : traces) p += score(infer(t.records, topo, InputKind::INT, q.params).hypothesis, t.truth, topo).precision;
    CHECK(q.precision == doctest::Approx(p / 3));
  }
  const auto front = grid_search(Scheme::Flock, grid, ts, InputKind::INT, ModelParams{});
  CHECK(front.size() == pareto_frontier(all).size());
  CHECK(front == grid_search(Scheme::Flock, grid, ts, InputKind::INT, ModelParams{}));

  ParamGrid one;
  one.p_g = {1e-3};
  one.p_b = {2e-2};
  one.rho = {1e-3};
  CHECK(grid_search(Scheme::Flock, one, ts, InputKind::INT, ModelParams{}).size() == 1);
  CHECK(evaluate_grid(Scheme::Vote007, grid, ts, InputKind::A2, ModelParams{}).size() == 2);

  TrainingSet empty;
  empty.topo = &topo;
  CHECK_THROWS_AS(grid_search(Scheme::Flock, grid, empty, InputKind::INT, ModelParams{}), Error);
  ParamGrid inverted;
  inverted.p_g = {0.1};
  inverted.p_b = {0.01};
  inverted.rho = {1e-3};
  CHECK_THROWS_AS(grid_search(Scheme::Flock, inverted, ts, InputKind::INT, ModelParams{}), Error);

  std::ostringstream out;
  write_frontier_csv(out, front);
  CHECK(out.str().rfind("# schema-version 1\np_g,p_b,rho_link,vote_threshold,precision,recall\n", 0) == 0);
}

TEST_CASE("passive calibration is judged on classes") {
  auto topo = build_fat_tree(4, 2);
  const auto red = reduced_topology(topo);
  std::vector<Trace> traces;
  for (std::uint64_t seed = 1; seed <= 2; ++seed) {
    FailureScenario sc;
    sc.failures.push_back({topo.inter_switch_links()[20 + seed], 0.02});
    SimConfig cfg;
    cfg.app_flows = 8000;
    cfg.seed = seed;
    traces.push_back(simulate(topo, sc, TrafficPattern{}, cfg));
  }
  TrainingSet ts;
  ts.topo = &topo;
  for (const auto& t : traces) ts.traces.push_back(&t);
  ParamGrid grid;
  grid.p_g = {1e-3};
  grid.p_b = {2e-2};
  grid.rho = {1e-3};
  const auto pts = evaluate_grid(Scheme::Flock, grid, ts, InputKind::P, ModelParams{});
  REQUIRE(pts.size() == 1);
  std::vector<EvalReport> reports;
  for (const auto& t : traces) {
    reports.push_back(score(infer(t.records, topo, InputKind::P, pts[0].params).hypothesis, t.truth, topo, &red));
  }
  const auto agg = aggregate(reports);
  CHECK(pts[0].precision == doctest::Approx(agg.mean_class_precision));
  CHECK(pts[0].recall == doctest::Approx(agg.mean_class_recall));
}
