#include "flock/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <unordered_map>

namespace flock {

namespace {

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Stream keys.
constexpr std::uint64_t kFailureKey = 1;
constexpr std::uint64_t kNoiseKey = 2;
constexpr std::uint64_t kHotKey = 3;
constexpr std::uint64_t kFlowKeyBase = 1ull << 40;
constexpr std::uint64_t kProbeKeyBase = 2ull << 40;
constexpr std::uint64_t kPairKeyBase = 3ull << 40;

std::uint64_t sample_binomial(SplitMix64& rng, std::uint64_t t, double p) {
  if (t == 0 || p <= 0.0) return 0;
  if (p >= 1.0) return t;
  std::binomial_distribution<std::uint64_t> d(t, p);
  return d(rng);
}

}  // namespace

SplitMix64 SplitMix64::stream(std::uint64_t seed, std::uint64_t key) {
  return SplitMix64(mix64(seed + 0x9e3779b97f4a7c15ull) ^ mix64(key * 0xd1342543de82ef95ull + 1));
}

SplitMix64::result_type SplitMix64::operator()() {
  state_ += 0x9e3779b97f4a7c15ull;
  return mix64(state_);
}

double SplitMix64::uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

std::uint64_t SplitMix64::below(std::uint64_t n) {
  if (n == 0) fail(ErrorCode::InvalidArgument, "below(0)");
  const std::uint64_t limit = max() - max() % n;
  std::uint64_t v;
  do {
    v = (*this)();
  } while (v >= limit);
  return v % n;
}

// ------------------------------------------------------------- scenarios

void write_scenario(std::ostream& out, const FailureScenario& s) {
  out << "kind " << (s.kind == ScenarioKind::SilentLinkDrops ? "silent" : "device") << '\n';
  for (const auto& f : s.failures) out << "fail " << f.id << ' ' << format_double(f.drop_rate) << '\n';
  if (s.random_failures > 0) {
    out << "random " << s.random_failures << ' ' << format_double(s.min_rate) << ' '
        << format_double(s.max_rate) << '\n';
  }
  out << "device_link_fraction " << format_double(s.device_link_fraction) << '\n';
}

FailureScenario parse_scenario(std::istream& in) {
  FailureScenario s;
  std::string line;
  std::size_t line_no = 0;
  auto bad = [&](const std::string& what) {
    fail(ErrorCode::Parse, "line " + std::to_string(line_no) + ": " + what);
  };
  auto real = [&](const std::string& tok) {
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(tok, &used);
    } catch (...) {
      bad("bad number '" + tok + "'");
    }
    if (used != tok.size()) bad("bad number '" + tok + "'");
    return v;
  };
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::vector<std::string> tok;
    for (std::string t; ls >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    if (tok[0] == "kind" && tok.size() == 2) {
      if (tok[1] == "silent") s.kind = ScenarioKind::SilentLinkDrops;
      else if (tok[1] == "device") s.kind = ScenarioKind::DeviceFailure;
      else bad("kind must be silent or device");
    } else if (tok[0] == "fail" && tok.size() == 3) {
      double id = real(tok[1]);
      if (id < 0 || id != std::floor(id) || id >= kNoComponent) bad("bad component id");
      s.failures.push_back({static_cast<ComponentId>(id), real(tok[2])});
    } else if (tok[0] == "random" && tok.size() == 4) {
      double n = real(tok[1]);
      if (n < 0 || n != std::floor(n)) bad("random count must be a nonnegative integer");
      s.random_failures = static_cast<int>(n);
      s.min_rate = real(tok[2]);
      s.max_rate = real(tok[3]);
    } else if (tok[0] == "device_link_fraction" && tok.size() == 2) {
      s.device_link_fraction = real(tok[1]);
    } else {
      bad("unknown or malformed record '" + tok[0] + "'");
    }
  }
  for (const auto& f : s.failures) {
    if (!(f.drop_rate > 0.0 && f.drop_rate < 1.0)) fail(ErrorCode::Parse, "drop rates must lie in (0,1)");
  }
  if (!(s.min_rate > 0.0 && s.min_rate <= s.max_rate && s.max_rate < 1.0)) {
    fail(ErrorCode::Parse, "random drop-rate range must satisfy 0 < min <= max < 1");
  }
  if (!(s.device_link_fraction > 0.0 && s.device_link_fraction <= 1.0)) {
    fail(ErrorCode::Parse, "device_link_fraction must lie in (0,1]");
  }
  return s;
}

FailureScenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open scenario file " + path);
  return parse_scenario(in);
}

DropField realize_failures(const Topology& topo, const FailureScenario& s, double noise_drop_max,
                           std::uint64_t seed) {
  DropField field;
  field.rate.assign(topo.component_count(), 0.0);
  std::vector<std::uint8_t> failed(topo.component_count(), 0);
  SplitMix64 rng = SplitMix64::stream(seed, kFailureKey);

  auto fail_link = [&](ComponentId l, double rate, ComponentId parent) {
    failed[l] = 1;
    field.rate[l] = rate;
    field.truth.failures.push_back({l, rate, parent});
  };
  auto fail_device = [&](ComponentId d, double rate, bool draw_rates) {
    std::vector<ComponentId> links;
    for (const auto& a : topo.neighbors(d)) {
      if (!failed[a.link]) links.push_back(a.link);
    }
    const auto degree = topo.neighbors(d).size();
    auto want = static_cast<std::size_t>(std::ceil(s.device_link_fraction * static_cast<double>(degree) - 1e-9));
    want = std::min(want, links.size());
    for (std::size_t i = 0; i < want; ++i) {
      std::swap(links[i], links[i + rng.below(links.size() - i)]);
    }
    std::sort(links.begin(), links.begin() + static_cast<std::ptrdiff_t>(want));
    for (std::size_t i = 0; i < want; ++i) {
      double r = draw_rates ? s.min_rate + (s.max_rate - s.min_rate) * rng.uniform() : rate;
      fail_link(links[i], r, d);
    }
  };

  for (const auto& f : s.failures) {
    if (topo.is_link(f.id)) {
      if (failed[f.id]) fail(ErrorCode::InvalidArgument, "link " + std::to_string(f.id) + " listed twice");
      fail_link(f.id, f.drop_rate, kNoComponent);
    } else if (topo.is_device(f.id) && !topo.is_host(f.id)) {
      if (s.kind != ScenarioKind::DeviceFailure) {
        fail(ErrorCode::InvalidArgument, "device failures need 'kind device'");
      }
      fail_device(f.id, f.drop_rate, false);
    } else {
      fail(ErrorCode::InvalidArgument, "cannot fail component " + std::to_string(f.id));
    }
  }
  if (s.random_failures > 0) {
    std::vector<ComponentId> pool;
    if (s.kind == ScenarioKind::SilentLinkDrops) {
      for (auto l : topo.links()) {
        if (!failed[l]) pool.push_back(l);
      }
    } else {
      for (auto d : topo.devices()) {
        if (!topo.is_host(d)) pool.push_back(d);
      }
    }
    const auto n = std::min<std::size_t>(static_cast<std::size_t>(s.random_failures), pool.size());
    for (std::size_t i = 0; i < n; ++i) std::swap(pool[i], pool[i + rng.below(pool.size() - i)]);
    std::sort(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(n));
    for (std::size_t i = 0; i < n; ++i) {
      if (s.kind == ScenarioKind::SilentLinkDrops) {
        fail_link(pool[i], s.min_rate + (s.max_rate - s.min_rate) * rng.uniform(), kNoComponent);
      } else {
        fail_device(pool[i], 0.0, true);
      }
    }
  }
  SplitMix64 noise = SplitMix64::stream(seed, kNoiseKey);
  for (auto l : topo.links()) {
    const double v = noise_drop_max * noise.uniform();
    if (!failed[l]) field.rate[l] = v;
  }
  return field;
}

// ------------------------------------------------------------- traffic

std::vector<ComponentId> hot_racks(const Topology& topo, const TrafficPattern& pattern, std::uint64_t seed) {
  std::set<ComponentId> racks;
  for (auto h : topo.hosts()) racks.insert(topo.host_tor(h));
  std::vector<ComponentId> all(racks.begin(), racks.end());
  auto n = static_cast<std::size_t>(std::ceil(pattern.hot_rack_fraction * static_cast<double>(all.size()) - 1e-9));
  n = std::clamp<std::size_t>(n, 1, all.size());
  SplitMix64 rng = SplitMix64::stream(seed, kHotKey);
  for (std::size_t i = 0; i < n; ++i) std::swap(all[i], all[i + rng.below(all.size() - i)]);
  all.resize(n);
  std::sort(all.begin(), all.end());
  return all;
}

namespace {

double path_drop(const Topology& topo, std::span<const ComponentId> path, const std::vector<double>& rate) {
  double keep = 1.0;
  for (auto c : path) {
    if (topo.is_link(c)) keep *= 1.0 - rate[c];
  }
  return 1.0 - keep;
}

}  // namespace

Trace simulate(const Topology& topo, const FailureScenario& scenario, const TrafficPattern& pattern,
               const SimConfig& config) {
  if (!(pattern.pareto_shape > 1.0)) fail(ErrorCode::InvalidArgument, "pareto shape must exceed 1");
  if (!(pattern.hot_rack_fraction > 0.0 && pattern.hot_rack_fraction < 1.0) ||
      !(pattern.hot_traffic_fraction > 0.0 && pattern.hot_traffic_fraction < 1.0)) {
    fail(ErrorCode::InvalidArgument, "skew fractions must lie in (0,1)");
  }
  if (pattern.packet_bytes == 0) fail(ErrorCode::InvalidArgument, "packet size must be positive");
  const auto& hosts = topo.hosts();
  if (hosts.size() < 2) fail(ErrorCode::InvalidArgument, "need at least two hosts");

  Router router(topo);
  Trace trace;
  trace.header.topo_checksum = topo.checksum();
  trace.header.seed = config.seed;
  trace.header.scenario = scenario.kind == ScenarioKind::SilentLinkDrops ? "silent" : "device";
  DropField field = realize_failures(topo, scenario, config.noise_drop_max, config.seed);
  trace.truth = field.truth;

  std::vector<ComponentId> hot_hosts;
  if (pattern.kind == TrafficKind::Skewed) {
    const auto hot = hot_racks(topo, pattern, config.seed);
    for (auto h : hosts) {
      if (std::binary_search(hot.begin(), hot.end(), topo.host_tor(h))) hot_hosts.push_back(h);
    }
  }
  const double scale = pattern.mean_flow_bytes * (pattern.pareto_shape - 1.0) / pattern.pareto_shape;

  trace.records.reserve(config.app_flows);
  for (std::uint64_t i = 0; i < config.app_flows; ++i) {
    SplitMix64 rng = SplitMix64::stream(config.seed, kFlowKeyBase + i);
    const auto& pool = (!hot_hosts.empty() && hot_hosts.size() >= 2 &&
                        rng.uniform() < pattern.hot_traffic_fraction)
                           ? hot_hosts
                           : hosts;
    const ComponentId src = pool[rng.below(pool.size())];
    ComponentId dst = pool[rng.below(pool.size() - 1)];
    if (dst == src) dst = pool[pool.size() - 1];
    const auto width = router.path_count(src, dst);
    Path path = router.path(src, dst, rng.below(width));
    const double u = 1.0 - rng.uniform();  // (0, 1]
    const double bytes = scale * std::pow(u, -1.0 / pattern.pareto_shape);
    double pk = std::ceil(bytes / static_cast<double>(pattern.packet_bytes));
    pk = std::clamp(pk, 1.0, static_cast<double>(pattern.max_flow_packets));
    FlowRecord rec;
    rec.src = src;
    rec.dst = dst;
    rec.kind = FlowKind::Application;
    rec.packets_sent = static_cast<std::uint64_t>(pk);
    rec.bad_packets = sample_binomial(rng, rec.packets_sent, path_drop(topo, path, field.rate));
    if (config.emit_rtt) {
      std::size_t links = 0;
      for (auto c : path) links += topo.is_link(c) ? 1 : 0;
      rec.rtt_ms = config.link_latency_ms * static_cast<double>(links) +
                   (rec.bad_packets > 0 ? config.retransmit_penalty_ms : 0.0);
    }
    rec.path = std::move(path);
    trace.records.push_back(std::move(rec));
  }

  if (config.probes_per_host > 0) {
    const auto cores = topo.devices_of_tier(Tier::Core);
    if (cores.empty()) fail(ErrorCode::InvalidArgument, "probes need core switches");
    for (auto h : hosts) {
      SplitMix64 rng = SplitMix64::stream(config.seed, kProbeKeyBase + h);
      std::map<std::pair<ComponentId, std::size_t>, std::uint64_t> sent;  // (core, path) -> packets
      for (std::uint64_t j = 0; j < config.probes_per_host; ++j) {
        const ComponentId core = cores[rng.below(cores.size())];
        sent[{core, rng.below(router.path_count(h, core))}]++;
      }
      for (const auto& [key, t] : sent) {
        Path path = router.path(h, key.first, key.second);
        FlowRecord rec;
        rec.src = h;
        rec.dst = key.first;
        rec.kind = FlowKind::ActiveProbe;
        rec.packets_sent = t;
        rec.bad_packets = sample_binomial(rng, t, path_drop(topo, path, field.rate));
        rec.path = std::move(path);
        trace.records.push_back(std::move(rec));
      }
    }
  }
  return trace;
}

// ------------------------------------------------------------------ skew

bool SkewStats::admits(std::uint64_t n_failures) const {
  if (total == 0 || n_failures == 0) return true;
  return static_cast<unsigned __int128>(2) * n_failures * shared <= static_cast<unsigned __int128>(total);
}

SkewStats measure_skew(std::span<const FlowRecord> records, const Topology& topo) {
  std::map<Path, std::uint64_t> by_path;
  for (const auto& r : records) {
    if (!r.path) fail(ErrorCode::InvalidArgument, "skew needs the true path of every record");
    if (r.packets_sent == 0) continue;
    Path links;
    for (auto c : *r.path) {
      if (topo.is_link(c)) links.push_back(c);
    }
    std::sort(links.begin(), links.end());
    by_path[links] += r.packets_sent;
  }
  std::unordered_map<ComponentId, std::uint64_t> single;
  std::unordered_map<std::uint64_t, std::uint64_t> pair;
  for (const auto& [links, n] : by_path) {
    for (std::size_t i = 0; i < links.size(); ++i) {
      single[links[i]] += n;
      for (std::size_t j = i + 1; j < links.size(); ++j) {
        pair[(static_cast<std::uint64_t>(links[i]) << 32) | links[j]] += n;
      }
    }
  }
  SkewStats best;
  auto offer = [&](ComponentId a, ComponentId b, std::uint64_t shared) {
    const std::uint64_t total = single[a];
    // shared / total > best.shared / best.total
    if (best.total == 0 || static_cast<unsigned __int128>(shared) * best.total >
                               static_cast<unsigned __int128>(best.shared) * total) {
      best = {shared, total, a, b};
    }
  };
  for (const auto& [key, n] : pair) {
    const auto a = static_cast<ComponentId>(key >> 32), b = static_cast<ComponentId>(key & 0xffffffffu);
    offer(a, b, n);
    offer(b, a, n);
  }
  return best;
}

// ------------------------------------------------------- certified traffic

Theorem2Instance make_theorem2_instance(const Topology& topo, std::size_t n_failures, const ModelParams& params,
                                        std::uint64_t seed, const Theorem2Config& config) {
  if (!(5.0 * params.p_g < params.p_b && params.p_b < 0.05)) {
    fail(ErrorCode::InvalidArgument, "parameters must satisfy 5 p_g < p_b < 0.05");
  }
  const auto& links = topo.links();
  if (n_failures > links.size()) fail(ErrorCode::InvalidArgument, "more failures than links");
  Router router(topo);
  const auto& hosts = topo.hosts();

  // Every ordered pair, every path.
  struct Route {
    ComponentId src, dst;
    Path path;
  };
  std::vector<Route> routes;
  std::size_t max_links = 1;
  for (auto s : hosts) {
    for (auto d : hosts) {
      if (s == d) continue;
      const PathSet ps = router.ecmp_paths(s, d);
      for (std::size_t i = 0; i < ps.size(); ++i) {
        Path p(ps[i].begin(), ps[i].end());
        std::size_t nl = 0;
        for (auto c : p) nl += topo.is_link(c) ? 1 : 0;
        max_links = std::max(max_links, nl);
        routes.push_back({s, d, std::move(p)});
      }
    }
  }

  SplitMix64 rng = SplitMix64::stream(seed, kFailureKey);
  std::vector<ComponentId> pool(links.begin(), links.end());
  for (std::size_t i = 0; i < n_failures; ++i) std::swap(pool[i], pool[i + rng.below(pool.size() - i)]);
  std::vector<ComponentId> failed(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(n_failures));
  std::sort(failed.begin(), failed.end());

  std::vector<double> rate(topo.component_count(), 0.0);
  Theorem2Instance inst;
  auto& cert = inst.certificate;
  cert.failures = n_failures;
  cert.min_failed_rate = 1.0;
  for (auto l : failed) {
    rate[l] = params.p_b * (1.2 + 0.8 * rng.uniform());
    cert.min_failed_rate = std::min(cert.min_failed_rate, rate[l]);
    inst.trace.truth.failures.push_back({l, rate[l], kNoComponent});
  }
  if (n_failures == 0) cert.min_failed_rate = 0.0;
  // Healthy paths then stay below p_g in total.
  const double good_max = params.p_g / static_cast<double>(max_links);
  SplitMix64 noise = SplitMix64::stream(seed, kNoiseKey);
  for (auto l : links) {
    const double v = good_max * noise.uniform();
    if (!std::binary_search(failed.begin(), failed.end(), l)) {
      rate[l] = v;
      cert.max_good_rate = std::max(cert.max_good_rate, v);
    }
  }

  std::uint64_t per_path = std::max<std::uint64_t>(config.packets_per_path, 1);
  for (int attempt = 0;; ++attempt) {
    Trace& tr = inst.trace;
    tr.records.clear();
    tr.header.topo_checksum = topo.checksum();
    tr.header.seed = seed;
    tr.header.scenario = "certified";
    for (std::size_t i = 0; i < routes.size(); ++i) {
      SplitMix64 prng = SplitMix64::stream(seed ^ (static_cast<std::uint64_t>(attempt) << 56), kPairKeyBase + i);
      FlowRecord rec;
      rec.src = routes[i].src;
      rec.dst = routes[i].dst;
      rec.kind = FlowKind::Application;
      rec.packets_sent = per_path;
      rec.bad_packets = sample_binomial(prng, per_path, path_drop(topo, routes[i].path, rate));
      rec.path = routes[i].path;
      tr.records.push_back(std::move(rec));
    }
    const SkewStats skew = measure_skew(tr.records, topo);
    cert.epsilon = skew.epsilon();
    cert.alpha = cert.epsilon > 0 ? 1.0 / cert.epsilon : std::numeric_limits<double>::infinity();
    if (!skew.admits(n_failures)) {
      fail(ErrorCode::Infeasible, "certificate violated: " + std::to_string(n_failures) +
                                      " failures exceed alpha/2 for epsilon " + format_double(cert.epsilon));
    }
    std::vector<std::uint64_t> per_link(topo.component_count(), 0);
    for (const auto& r : routes) {
      for (auto c : r.path) {
        if (topo.is_link(c)) per_link[c] += per_path;
      }
    }
    cert.min_link_packets = std::numeric_limits<std::uint64_t>::max();
    for (auto l : links) cert.min_link_packets = std::min(cert.min_link_packets, per_link[l]);
    cert.packets_per_path = per_path;
    if (cert.min_link_packets >= config.t_min) break;
    if (attempt + 1 >= config.max_attempts) {
      fail(ErrorCode::Infeasible, "certificate violated: could not reach T_min = " + std::to_string(config.t_min) +
                                      " packets on every link");
    }
    per_path *= 2;
  }
  if (!(cert.max_good_rate < params.p_g)) fail(ErrorCode::Internal, "good-link rate bound violated");
  if (n_failures > 0 && !(cert.min_failed_rate > params.p_b)) fail(ErrorCode::Internal, "failed-link rate bound violated");
  return inst;
}

}  // namespace flock
