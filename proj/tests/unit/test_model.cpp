#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "flock/model.hpp"

using namespace flock;
using Big = boost::multiprecision::cpp_bin_float_50;

namespace {

// ln of the flow probability under H over that under H0, straight from the
// mixture over paths, in 50-digit arithmetic.
Big oracle_flow_ll(std::size_t w, std::size_t b, std::uint64_t t, std::uint64_t r, double pg, double pb) {
  const Big g(pg), bad(pb);
  const auto good_mass = pow(g, r) * pow(Big(1) - g, t - r);
  const auto bad_mass = pow(bad, r) * pow(Big(1) - bad, t - r);
  const Big with = (Big(b) * bad_mass + Big(w - b) * good_mass) / Big(w);
  return log(with) - log(good_mass);
}

SelectedFlow flow_on(std::vector<Path> paths, std::uint64_t t, std::uint64_t r) {
  SelectedFlow f;
  f.t = t;
  f.r = r;
  f.paths = std::make_shared<const PathSet>(std::move(paths));
  return f;
}

ModelParams params(double pg, double pb, double rho = 1e-3) {
  ModelParams p;
  p.p_g = pg;
  p.p_b = pb;
  p.rho_link = rho;
  return p;
}

}  // namespace

TEST_CASE("flow likelihood worked values") {
  auto p = params(0.01, 0.1);
  CHECK(flow_ll(3, 0, flow_log_ratio(10, 4, p)) == 0.0);
  CHECK(flow_ll(1, 1, flow_log_ratio(1, 1, p)) == doctest::Approx(std::log(10.0)).epsilon(1e-12));
  CHECK(flow_ll(1, 1, flow_log_ratio(1, 1, p)) == doctest::Approx(2.302585).epsilon(1e-6));
  const double expect = std::log(std::pow(0.9 / 0.99, 10) + 1) - std::log(2.0);
  CHECK(flow_ll(2, 1, flow_log_ratio(10, 0, p)) == doctest::Approx(expect).epsilon(1e-12));
  CHECK(flow_ll(2, 1, flow_log_ratio(10, 0, p)) == doctest::Approx(-0.3670).epsilon(1e-3));
  CHECK(static_cast<double>(oracle_flow_ll(2, 1, 10, 0, 0.01, 0.1)) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("flow likelihood matches a 50-digit oracle") {
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int checked = 0;
  for (int i = 0; i < 1000; ++i) {
    const double pg = std::pow(10.0, -6.0 + 5.0 * u(rng));   // 1e-6 .. 0.1
    const double pb = pg + (0.9 - pg) * (0.001 + 0.999 * u(rng));
    const std::uint64_t t = static_cast<std::uint64_t>(std::pow(10.0, 6.0 * u(rng)));
    std::uint64_t r = 0;
    switch (i % 3) {
      case 0: r = 0; break;
      case 1: r = static_cast<std::uint64_t>(u(rng) * std::min<double>(t, 50)); break;
      default: r = static_cast<std::uint64_t>(u(rng) * t); break;
    }
    const std::size_t w = 1 + rng() % 16;
    const std::size_t b = 1 + rng() % w;
    ModelParams p = params(pg, pb);
    const double got = flow_ll(w, b, flow_log_ratio(t, r, p));
    const Big want = oracle_flow_ll(w, b, t, r, pg, pb);
    REQUIRE(std::isfinite(got));
    const Big err = abs(Big(got) - want);
    const Big scale = std::max(abs(want), Big(1e-300));
    CHECK(static_cast<double>(err / scale) <= 1e-9);
    ++checked;
  }
  CHECK(checked == 1000);
}

TEST_CASE("flow likelihood is increasing in bad packets") {
  auto p = params(1e-3, 2e-2);
  for (std::size_t w : {1u, 4u, 16u}) {
    for (std::size_t b = 1; b <= w; ++b) {
      double prev = -INFINITY;
      for (std::uint64_t r = 0; r <= 30; ++r) {
        const double v = flow_ll(w, b, flow_log_ratio(1000, r, p));
        CHECK(v > prev);
        prev = v;
      }
    }
  }
}

TEST_CASE("flow likelihood depends only on the number of failed paths") {
  auto p = params(1e-3, 5e-2);
  auto a = flow_on({{1, 100, 2}, {3, 101, 4}, {5, 102, 6}}, 500, 7);
  auto b = flow_on({{5, 102, 6}, {1, 100, 2}, {3, 101, 4}}, 500, 7);
  Hypothesis h({2, 4});
  CHECK(failed_paths(*a.paths, h) == 2);
  CHECK(flow_log_likelihood(a, h, p) == flow_log_likelihood(b, h, p));
  CHECK(flow_log_likelihood(a, Hypothesis({2, 4}), p) == flow_log_likelihood(a, Hypothesis({2, 3}), p));
  CHECK(flow_log_likelihood(a, Hypothesis{}, p) == 0.0);
  // a failed device fails every path through it
  CHECK(failed_paths(*a.paths, Hypothesis({101})) == 1);
  CHECK(failed_paths(*a.paths, Hypothesis({101, 3})) == 1);
  CHECK(failed_paths(*a.paths, Hypothesis({7})) == 0);
}

TEST_CASE("priors") {
  ModelParams p;
  p.rho_link = 0.001;
  CHECK(link_log_odds(p) == doctest::Approx(-6.9068).epsilon(1e-4));
  CHECK(device_log_odds(p) == doctest::Approx(-34.534).epsilon(1e-4));
  CHECK(device_log_odds(p) == doctest::Approx(5 * std::log(0.001 / 0.999)).epsilon(1e-12));
  p.device_prior_log_factor = 1.0;
  CHECK(device_log_odds(p) == link_log_odds(p));

  auto t = build_fat_tree(4, 1);
  p.device_prior_log_factor = 5.0;
  CHECK(prior_log_odds(t, t.links().front(), p) == link_log_odds(p));
  CHECK(prior_log_odds(t, t.devices_of_tier(Tier::ToR).front(), p) == device_log_odds(p));
}

TEST_CASE("hypothesis log-likelihood") {
  auto t = build_fat_tree(4, 1);
  ModelParams p = params(1e-3, 2e-2, 0.001);
  const auto& h = t.hosts();
  Router router(t);
  std::vector<SelectedFlow> flows;
  for (std::size_t i = 1; i < h.size(); ++i) {
    auto f = flow_on({router.path(h[0], h[i], 0)}, 1000, i % 3);
    flows.push_back(f);
  }
  CHECK(hypothesis_log_likelihood(flows, Hypothesis{}, t, p) == 0.0);

  // a link no flow crosses: prior only
  const ComponentId lonely = t.host_uplink(h[1]);
  std::vector<SelectedFlow> one{flows.back()};
  REQUIRE(failed_paths(*one[0].paths, Hypothesis({lonely})) == 0);
  CHECK(hypothesis_log_likelihood(one, Hypothesis({lonely}), t, p) == doctest::Approx(-6.9068).epsilon(1e-4));

  // additivity over disjoint flow lists, prior counted once
  const Hypothesis hyp({t.host_uplink(h[0]), t.inter_switch_links()[2]});
  std::span<const SelectedFlow> all(flows);
  const double whole = hypothesis_log_likelihood(all, hyp, t, p);
  const double prior = 2 * link_log_odds(p);
  const double a = hypothesis_log_likelihood(all.first(5), hyp, t, p) - prior;
  const double b = hypothesis_log_likelihood(all.subspan(5), hyp, t, p) - prior;
  CHECK(whole == doctest::Approx(a + b + prior).epsilon(1e-12));
}

TEST_CASE("parameter validation and files") {
  ModelParams p;
  CHECK_NOTHROW(p.validate());
  for (auto bad : {params(0.0, 0.1), params(0.1, 0.1), params(0.2, 0.1), params(0.01, 1.0), params(0.01, 0.1, 0.5),
                   params(0.01, 0.1, 0.0)}) {
    CHECK_THROWS_AS(bad.validate(), Error);
  }
  p = params(1.234e-4, 0.0321, 0.0042);
  p.device_prior_log_factor = 3.5;
  p.rtt_threshold_ms = 12.5;
  p.vote_threshold = 0.35;
  p.max_failures = 3;
  std::ostringstream out;
  write_params(out, p);
  std::istringstream in(out.str());
  CHECK(parse_params(in) == p);

  std::istringstream partial("p_g=0.002\n# note\np_b = 0.05\n");
  auto q = parse_params(partial);
  CHECK(q.p_g == 0.002);
  CHECK(q.p_b == 0.05);
  CHECK(q.rho_link == ModelParams{}.rho_link);

  std::istringstream unknown("p_q=0.1\n");
  CHECK_THROWS_AS(parse_params(unknown), Error);
  std::istringstream junk("p_g=abc\n");
  CHECK_THROWS_AS(parse_params(junk), Error);
  std::istringstream invalid("p_g=0.5\np_b=0.1\n");
  CHECK_THROWS_AS(parse_params(invalid), Error);
}

TEST_CASE("hypothesis set semantics and files") {
  Hypothesis h({5, 2, 5, 9});
  CHECK(h.ids() == std::vector<ComponentId>{2, 5, 9});
  CHECK_FALSE(h.insert(5));
  CHECK(h.insert(3));
  CHECK(h.contains(3));
  CHECK(h.size() == 4);

  auto t = build_fat_tree(4, 1);
  Hypothesis g({t.links()[0], t.devices_of_tier(Tier::Agg)[1]});
  std::ostringstream out;
  write_hypothesis(out, g);
  std::istringstream in(out.str());
  CHECK(parse_hypothesis(in, t) == g);
  std::istringstream bad("fail 999999\n");
  CHECK_THROWS_AS(parse_hypothesis(bad, t), Error);
}
