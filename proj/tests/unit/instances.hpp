#pragma once

// Random small inference instances shared by the search and baseline tests.

#include <random>
#include <vector>

#include "flock/flow_index.hpp"
#include "flock/model.hpp"
#include "flock/telemetry.hpp"
#include "flock/topology.hpp"

namespace testing_support {

using namespace flock;

struct Instance {
  Topology topo;
  std::vector<SelectedFlow> flows;
  SearchSpace space;
  ModelParams params;
  std::vector<ComponentId> failed;
};

// Flows between random host pairs with binomial drops over a random set of
// failed links. Passive instances keep the full ECMP set per flow.
inline Instance random_instance(Topology topo, std::uint64_t seed, bool passive, std::size_t flows,
                                bool devices = true, std::size_t max_failed = 3) {
  Instance in;
  in.topo = std::move(topo);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto& links = in.topo.links();
  std::vector<double> rate(in.topo.component_count(), 0.0);
  const std::size_t nf = 1 + rng() % max_failed;
  for (std::size_t i = 0; i < nf; ++i) {
    const ComponentId l = links[rng() % links.size()];
    if (rate[l] > 0) continue;
    rate[l] = 0.005 + 0.045 * u(rng);
    in.failed.push_back(l);
  }
  for (auto l : links) {
    if (rate[l] == 0.0) rate[l] = 2e-4 * u(rng);
  }
  in.params.p_g = 1e-3;
  in.params.p_b = 2e-2;
  in.params.rho_link = 1e-3;

  Router router(in.topo);
  const auto& hosts = in.topo.hosts();
  for (std::size_t i = 0; i < flows; ++i) {
    const ComponentId s = hosts[rng() % hosts.size()];
    ComponentId d = s;
    while (d == s) d = hosts[rng() % hosts.size()];
    auto ecmp = router.shared_paths(s, d);
    const auto chosen = (*ecmp)[rng() % ecmp->size()];
    double keep = 1.0;
    for (auto c : chosen) {
      if (in.topo.is_link(c)) keep *= 1.0 - rate[c];
    }
    const std::uint64_t t = 50 + rng() % 1950;
    std::binomial_distribution<std::uint64_t> bin(t, 1.0 - keep);
    SelectedFlow f;
    f.src = s;
    f.dst = d;
    f.t = t;
    f.r = bin(rng);
    f.record = static_cast<std::uint32_t>(i);
    f.paths = passive ? ecmp : std::make_shared<const PathSet>(std::vector<Path>{Path(chosen.begin(), chosen.end())});
    in.flows.push_back(std::move(f));
  }
  in.space = full_search_space(in.topo, devices);
  return in;
}

inline std::vector<ComponentId> candidates(const SearchSpace& space) {
  std::vector<ComponentId> out;
  for (std::size_t c = 0; c < space.component_count(); ++c) {
    if (space.candidate[c]) out.push_back(static_cast<ComponentId>(c));
  }
  return out;
}

inline Hypothesis with(Hypothesis h, ComponentId c) {
  h.insert(c);
  return h;
}

}  // namespace testing_support
