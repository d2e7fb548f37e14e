#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "doctest.h"
#include "flock/simulator.hpp"

using namespace flock;

namespace {

std::string text(const Trace& t) {
  std::ostringstream out;
  write_trace(out, t);
  return out.str();
}

bool on_path(const FlowRecord& r, ComponentId c) {
  return std::find(r.path->begin(), r.path->end(), c) != r.path->end();
}

// max over ordered link pairs of T({a,b}) / T({a}), by brute force.
double oracle_epsilon(const std::vector<FlowRecord>& recs, const Topology& topo) {
  std::map<ComponentId, double> single;
  std::map<std::pair<ComponentId, ComponentId>, double> pair;
  for (const auto& r : recs) {
    std::set<ComponentId> ls;
    for (auto c : *r.path) {
      if (topo.is_link(c)) ls.insert(c);
    }
    for (auto a : ls) {
      single[a] += static_cast<double>(r.packets_sent);
      for (auto b : ls) {
        if (a != b) pair[{a, b}] += static_cast<double>(r.packets_sent);
      }
    }
  }
  double eps = 0.0;
  for (auto [k, v] : pair) eps = std::max(eps, v / single[k.first]);
  return eps;
}

FlowRecord flow_over(const Path& p, std::uint64_t t) {
  FlowRecord r;
  r.packets_sent = t;
  r.path = p;
  return r;
}

}  // namespace

TEST_CASE("counter-based streams") {
  auto a = SplitMix64::stream(7, 1), b = SplitMix64::stream(7, 1), c = SplitMix64::stream(7, 2),
       d = SplitMix64::stream(8, 1);
  const auto x = a();
  CHECK(x == b());
  CHECK(x != c());
  CHECK(x != d());
  SplitMix64 r(3);
  double sum = 0;
  std::uint64_t hist[5] = {};
  for (int i = 0; i < 100000; ++i) {
    const double u = r.uniform();
    CHECK((u >= 0.0 && u < 1.0));
    sum += u;
    ++hist[r.below(5)];
  }
  CHECK(sum / 100000 == doctest::Approx(0.5).epsilon(0.01));
  for (auto h : hist) CHECK(std::abs(static_cast<double>(h) - 20000.0) < 4 * std::sqrt(20000.0 * 0.8));
  CHECK_THROWS_AS(r.below(0), Error);
}

TEST_CASE("no failures and no noise means no drops") {
  auto topo = build_fat_tree(4, 2);
  SimConfig cfg;
  cfg.app_flows = 2000;
  cfg.probes_per_host = 50;
  cfg.noise_drop_max = 0.0;
  auto tr = simulate(topo, FailureScenario{}, TrafficPattern{}, cfg);
  for (const auto& r : tr.records) CHECK(r.bad_packets == 0);
  CHECK(tr.truth.failures.empty());
}

TEST_CASE("binomial drops on a single failed link") {
  auto topo = build_two_tier(1, 2, 1);
  const ComponentId bad = topo.inter_switch_links()[0];
  FailureScenario sc;
  sc.failures.push_back({bad, 0.01});
  TrafficPattern pat;
  pat.mean_flow_bytes = 1e12;
  pat.max_flow_packets = 10000;  // every flow is clamped to 1e4 packets
  SimConfig cfg;
  cfg.app_flows = 1;
  cfg.noise_drop_max = 0.0;
  const double sigma = std::sqrt(1e4 * 0.01 * 0.99);
  double sum = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    cfg.seed = seed;
    auto tr = simulate(topo, sc, pat, cfg);
    REQUIRE(tr.records.size() == 1);
    const auto& r = tr.records[0];
    REQUIRE(r.packets_sent == 10000);
    REQUIRE(on_path(r, bad));
    CHECK(std::abs(static_cast<double>(r.bad_packets) - 100.0) <= 4 * sigma);
    sum += static_cast<double>(r.bad_packets);
  }
  CHECK(std::abs(sum / 100 - 100.0) <= 4 * sigma / 10);
}

TEST_CASE("random failure rates and noise ranges") {
  auto topo = build_fat_tree(4, 2);
  FailureScenario sc;
  sc.random_failures = 6;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto f = realize_failures(topo, sc, 1e-4, seed);
    REQUIRE(f.truth.failures.size() == 6);
    std::set<ComponentId> failed;
    for (const auto& x : f.truth.failures) {
      CHECK(topo.is_link(x.id));
      CHECK(x.drop_rate >= 0.001);
      CHECK(x.drop_rate <= 0.01);
      CHECK(f.rate[x.id] == x.drop_rate);
      CHECK(x.parent == kNoComponent);
      failed.insert(x.id);
    }
    CHECK(failed.size() == 6);
    for (auto l : topo.links()) {
      if (!failed.count(l)) CHECK((f.rate[l] >= 0.0 && f.rate[l] <= 1e-4));
    }
  }
  CHECK(realize_failures(topo, sc, 1e-4, 3).truth == realize_failures(topo, sc, 1e-4, 3).truth);
  CHECK_FALSE(realize_failures(topo, sc, 1e-4, 3).truth == realize_failures(topo, sc, 1e-4, 4).truth);
}

TEST_CASE("device failures fail a fraction of the device's links") {
  auto topo = build_fat_tree(8, 2);
  const ComponentId agg = topo.devices_of_tier(Tier::Agg)[3];
  const auto degree = topo.neighbors(agg).size();
  for (double frac : {1.0, 0.5, 0.3}) {
    FailureScenario sc;
    sc.kind = ScenarioKind::DeviceFailure;
    sc.device_link_fraction = frac;
    sc.failures.push_back({agg, 0.004});
    auto f = realize_failures(topo, sc, 0.0, 9);
    CHECK(f.truth.failures.size() == static_cast<std::size_t>(std::ceil(frac * degree - 1e-9)));
    for (const auto& x : f.truth.failures) {
      CHECK(x.parent == agg);
      CHECK(x.drop_rate == 0.004);
      const auto& l = topo.link(x.id);
      CHECK((l.a == agg || l.b == agg));
    }
  }
  FailureScenario random;
  random.kind = ScenarioKind::DeviceFailure;
  random.random_failures = 2;
  random.device_link_fraction = 0.5;
  auto f = realize_failures(topo, random, 0.0, 4);
  std::set<ComponentId> parents;
  for (const auto& x : f.truth.failures) {
    parents.insert(x.parent);
    CHECK((x.drop_rate >= random.min_rate && x.drop_rate <= random.max_rate));
  }
  CHECK(parents.size() == 2);
  for (auto p : parents) CHECK((topo.is_device(p) && !topo.is_host(p)));

  FailureScenario wrong;
  wrong.failures.push_back({agg, 0.01});
  CHECK_THROWS_AS(realize_failures(topo, wrong, 0.0, 1), Error);
  wrong.kind = ScenarioKind::DeviceFailure;
  wrong.failures = {{topo.hosts()[0], 0.01}};
  CHECK_THROWS_AS(realize_failures(topo, wrong, 0.0, 1), Error);
}

TEST_CASE("scenario files") {
  FailureScenario s;
  s.kind = ScenarioKind::DeviceFailure;
  s.failures = {{12, 0.005}, {40, 0.02}};
  s.random_failures = 3;
  s.min_rate = 0.002;
  s.max_rate = 0.008;
  s.device_link_fraction = 0.25;
  std::ostringstream out;
  write_scenario(out, s);
  std::istringstream in(out.str());
  auto back = parse_scenario(in);
  CHECK(back.kind == s.kind);
  CHECK(back.failures.size() == 2);
  CHECK(back.failures[1].id == 40);
  CHECK(back.failures[1].drop_rate == 0.02);
  CHECK(back.random_failures == 3);
  CHECK(back.min_rate == 0.002);
  CHECK(back.max_rate == 0.008);
  CHECK(back.device_link_fraction == 0.25);
  for (const char* bad : {"kind loud\n", "fail 3 1.5\n", "fail x 0.1\n", "random 2 0.01 0.001\n",
                          "device_link_fraction 0\n", "explode 1\n"}) {
    std::istringstream b(bad);
    CHECK_THROWS_AS(parse_scenario(b), Error);
  }
}

TEST_CASE("simulation is deterministic per seed") {
  auto topo = build_fat_tree(4, 2);
  FailureScenario sc;
  sc.random_failures = 2;
  SimConfig cfg;
  cfg.app_flows = 3000;
  cfg.probes_per_host = 30;
  cfg.emit_rtt = true;
  cfg.seed = 11;
  TrafficPattern pat;
  pat.kind = TrafficKind::Skewed;
  auto a = simulate(topo, sc, pat, cfg);
  auto b = simulate(topo, sc, pat, cfg);
  CHECK(text(a) == text(b));
  cfg.seed = 12;
  CHECK(text(a) != text(simulate(topo, sc, pat, cfg)));
  // the record list matches what was recorded
  std::istringstream in(text(a));
  CHECK(parse_trace(in, topo) == a);
}

TEST_CASE("records are consistent with the topology") {
  auto topo = build_fat_tree(4, 2);
  Router router(topo);
  SimConfig cfg;
  cfg.app_flows = 2000;
  cfg.probes_per_host = 40;
  cfg.emit_rtt = true;
  FailureScenario sc;
  sc.random_failures = 1;
  auto tr = simulate(topo, sc, TrafficPattern{}, cfg);
  std::map<ComponentId, std::uint64_t> probe_packets;
  const auto cores = topo.devices_of_tier(Tier::Core);
  std::size_t apps = 0;
  for (const auto& r : tr.records) {
    REQUIRE(r.path);
    CHECK(router.contains(r.src, r.dst, *r.path));
    CHECK(r.bad_packets <= r.packets_sent);
    CHECK(r.packets_sent >= 1);
    if (r.kind == FlowKind::ActiveProbe) {
      probe_packets[r.src] += r.packets_sent;
      CHECK(std::find(cores.begin(), cores.end(), r.dst) != cores.end());
      CHECK(r.path->back() == r.dst);
    } else {
      ++apps;
      CHECK(topo.is_host(r.dst));
      CHECK(r.src != r.dst);
      REQUIRE(r.rtt_ms);
      std::size_t links = 0;
      for (auto c : *r.path) links += topo.is_link(c);
      const double base = 0.1 * static_cast<double>(links);
      CHECK(*r.rtt_ms == doctest::Approx(base + (r.bad_packets > 0 ? 20.0 : 0.0)));
    }
  }
  CHECK(apps == 2000);
  CHECK(probe_packets.size() == topo.hosts().size());
  for (auto [h, n] : probe_packets) CHECK(n == 40);
}

TEST_CASE("flow sizes follow the truncated Pareto law") {
  auto topo = build_fat_tree(4, 2);
  SimConfig cfg;
  cfg.app_flows = 50000;
  cfg.noise_drop_max = 0.0;
  TrafficPattern pat;
  auto tr = simulate(topo, FailureScenario{}, pat, cfg);
  const double scale = pat.mean_flow_bytes * (pat.pareto_shape - 1.0) / pat.pareto_shape;
  const auto min_packets = static_cast<std::uint64_t>(std::ceil(scale / pat.packet_bytes));
  std::size_t above = 0;
  const double x = 100.0 * scale;  // P[bytes > x] = 100^-shape
  for (const auto& r : tr.records) {
    CHECK(r.packets_sent >= min_packets);
    CHECK(r.packets_sent <= pat.max_flow_packets);
    above += static_cast<double>(r.packets_sent) * pat.packet_bytes > x + pat.packet_bytes;
  }
  const double p = std::pow(100.0, -pat.pareto_shape);
  const double n = 50000;
  CHECK(std::abs(static_cast<double>(above) - n * p) <= 4 * std::sqrt(n * p * (1 - p)) + 2);
}

TEST_CASE("aggregate drop fraction tracks the configured rate") {
  auto topo = build_fat_tree(4, 2);
  const ComponentId bad = topo.inter_switch_links()[7];
  FailureScenario sc;
  sc.failures.push_back({bad, 0.006});
  SimConfig cfg;
  cfg.app_flows = 20000;
  cfg.noise_drop_max = 0.0;
  auto tr = simulate(topo, sc, TrafficPattern{}, cfg);
  double t = 0, r = 0;
  for (const auto& rec : tr.records) {
    if (on_path(rec, bad)) {
      t += static_cast<double>(rec.packets_sent);
      r += static_cast<double>(rec.bad_packets);
    } else {
      CHECK(rec.bad_packets == 0);
    }
  }
  REQUIRE(t > 0);
  CHECK(std::abs(r / t - 0.006) <= 4 * std::sqrt(0.006 * 0.994 / t));
}

TEST_CASE("skewed traffic concentrates on hot racks") {
  auto topo = build_fat_tree(8, 4);
  TrafficPattern pat;
  pat.kind = TrafficKind::Skewed;
  const auto hot = hot_racks(topo, pat, 5);
  CHECK(hot.size() == 2);  // ceil(0.05 * 32)
  CHECK(hot == hot_racks(topo, pat, 5));
  auto is_hot = [&](ComponentId h) { return std::binary_search(hot.begin(), hot.end(), topo.host_tor(h)); };

  SimConfig cfg;
  cfg.app_flows = 200000;
  cfg.seed = 5;
  cfg.noise_drop_max = 0.0;
  auto tr = simulate(topo, FailureScenario{}, pat, cfg);
  double both = 0;
  for (const auto& r : tr.records) both += is_hot(r.src) && is_hot(r.dst);
  // hot-pool draws, plus the rare uniform draw landing on two hot hosts
  const double expect = 0.5 + 0.5 * (8.0 / 128) * (7.0 / 127);
  CHECK(std::abs(both / 200000 - expect) <= 0.02);

  // packet-weighted share towards hot racks, with a light-tailed size law
  pat.pareto_shape = 3.0;
  auto light = simulate(topo, FailureScenario{}, pat, cfg);
  double to_hot = 0, total = 0;
  for (const auto& r : light.records) {
    total += static_cast<double>(r.packets_sent);
    if (is_hot(r.dst)) to_hot += static_cast<double>(r.packets_sent);
  }
  CHECK(to_hot / total >= pat.hot_traffic_fraction - 0.02);

  TrafficPattern bad = pat;
  bad.pareto_shape = 1.0;
  CHECK_THROWS_AS(simulate(topo, FailureScenario{}, bad, cfg), Error);
  bad = pat;
  bad.hot_rack_fraction = 0.0;
  CHECK_THROWS_AS(simulate(topo, FailureScenario{}, bad, cfg), Error);
}

TEST_CASE("traffic skew measurement") {
  auto topo = build_fat_tree(4, 1);
  Router router(topo);
  const auto& h = topo.hosts();
  // disjoint single-link paths
  std::vector<FlowRecord> two{flow_over({topo.host_uplink(h[0])}, 10), flow_over({topo.host_uplink(h[1])}, 10)};
  CHECK(measure_skew(two, topo).epsilon() == 0.0);
  std::vector<FlowRecord> one{flow_over({topo.host_uplink(h[0]), topo.host_tor(h[0]), topo.inter_switch_links()[8]}, 7)};
  auto s = measure_skew(one, topo);
  CHECK(s.epsilon() == 1.0);
  CHECK(s.shared == 7);
  CHECK(s.total == 7);
  CHECK(s.admits(0));
  CHECK_FALSE(s.admits(1));

  SimConfig cfg;
  cfg.app_flows = 5000;
  auto tr = simulate(topo, FailureScenario{}, TrafficPattern{}, cfg);
  auto m = measure_skew(tr.records, topo);
  CHECK(m.epsilon() == doctest::Approx(oracle_epsilon(tr.records, topo)).epsilon(1e-12));
  CHECK(static_cast<double>(m.shared) / static_cast<double>(m.total) == m.epsilon());
  CHECK(m.admits(static_cast<std::uint64_t>(std::floor(1.0 / (2 * m.epsilon())))));

  SkewStats half{1, 4, 0, 0};  // epsilon 1/4, alpha 4
  CHECK(half.admits(2));
  CHECK_FALSE(half.admits(3));
}

TEST_CASE("uniform traffic on a k=8 fat-tree is weakly skewed") {
  auto topo = build_fat_tree(8, 4);
  SimConfig cfg;
  cfg.app_flows = 100000;
  TrafficPattern pat;
  pat.pareto_shape = 3.0;
  auto tr = simulate(topo, FailureScenario{}, pat, cfg);
  const double eps = measure_skew(tr.records, topo).epsilon();
  MESSAGE("uniform k=8 skew epsilon " << eps);
  CHECK(eps < 0.5);
}

TEST_CASE("certified instances") {
  auto topo = build_fat_tree(4, 2);
  ModelParams p;
  p.p_g = 0.005;
  p.p_b = 0.04;
  auto inst = make_theorem2_instance(topo, 1, p, 3);
  const auto& c = inst.certificate;
  CHECK(c.failures == 1);
  CHECK(inst.trace.truth.failures.size() == 1);
  CHECK(c.max_good_rate < p.p_g);
  CHECK(c.min_failed_rate > p.p_b);
  const auto skew = measure_skew(inst.trace.records, topo);
  CHECK(c.epsilon == skew.epsilon());
  CHECK(skew.admits(c.failures));
  CHECK(c.alpha == doctest::Approx(1.0 / c.epsilon));
  // one record per ordered pair and path
  std::size_t expect = 0;
  for (auto s : topo.hosts()) {
    for (auto d : topo.hosts()) {
      if (s != d) expect += ecmp_paths(topo, s, d).size();
    }
  }
  CHECK(inst.trace.records.size() == expect);
  // every good path's drop probability is below p_g
  for (const auto& r : inst.trace.records) CHECK(r.packets_sent == c.packets_per_path);

  Theorem2Config dense;
  dense.t_min = 5 * c.min_link_packets;
  auto denser = make_theorem2_instance(topo, 1, p, 3, dense);
  CHECK(denser.certificate.min_link_packets >= dense.t_min);
  CHECK(denser.certificate.packets_per_path == 8 * c.packets_per_path);

  dense.t_min = 1ull << 40;
  try {
    make_theorem2_instance(topo, 1, p, 3, dense);
    FAIL("expected an infeasible certificate");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Infeasible);
    CHECK(std::string(e.what()).find("T_min") != std::string::npos);
  }
  try {
    make_theorem2_instance(topo, 40, p, 3);
    FAIL("expected an infeasible certificate");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Infeasible);
    CHECK(std::string(e.what()).find("alpha/2") != std::string::npos);
  }
  ModelParams wrong;
  wrong.p_g = 0.01;
  wrong.p_b = 0.04;
  CHECK_THROWS_AS(make_theorem2_instance(topo, 1, wrong, 3), Error);
  wrong.p_g = 0.005;
  wrong.p_b = 0.06;
  CHECK_THROWS_AS(make_theorem2_instance(topo, 1, wrong, 3), Error);
}
