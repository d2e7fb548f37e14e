#include "flock/topology.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

namespace flock {

const char* to_string(Tier tier) {
  switch (tier) {
    case Tier::Host: return "host";
    case Tier::ToR: return "tor";
    case Tier::Agg: return "agg";
    case Tier::Core: return "core";
  }
  return "?";
}

Tier parse_tier(const std::string& text) {
  if (text == "host") return Tier::Host;
  if (text == "tor") return Tier::ToR;
  if (text == "agg") return Tier::Agg;
  if (text == "core") return Tier::Core;
  fail(ErrorCode::Parse, "unknown tier '" + text + "'");
}

// ---------------------------------------------------------------- PathSet

PathSet::PathSet(std::vector<Path> paths) {
  std::sort(paths.begin(), paths.end());
  paths.erase(std::unique(paths.begin(), paths.end()), paths.end());
  offsets_.reserve(paths.size() + 1);
  offsets_.push_back(0);
  for (const auto& p : paths) {
    flat_.insert(flat_.end(), p.begin(), p.end());
    offsets_.push_back(static_cast<std::uint32_t>(flat_.size()));
  }
}

std::optional<std::size_t> PathSet::find(std::span<const ComponentId> path) const {
  for (std::size_t i = 0; i < size(); ++i) {
    auto p = (*this)[i];
    if (std::equal(p.begin(), p.end(), path.begin(), path.end())) return i;
  }
  return std::nullopt;
}

std::vector<ComponentId> PathSet::components() const {
  std::vector<ComponentId> out(flat_);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// --------------------------------------------------------------- Topology

void Topology::reserve_id(ComponentId id, ComponentKind kind) {
  if (id == kNoComponent) fail(ErrorCode::InvalidArgument, "invalid component id");
  if (id >= kinds_.size()) {
    kinds_.resize(id + 1, ComponentKind::None);
    tiers_.resize(id + 1, Tier::Host);
    link_table_.resize(id + 1);
    adjacency_.resize(id + 1);
  }
  if (kinds_[id] != ComponentKind::None) {
    fail(ErrorCode::InvalidArgument, "duplicate component id " + std::to_string(id));
  }
  kinds_[id] = kind;
}

ComponentId Topology::add_device(Tier tier) {
  return add_device(static_cast<ComponentId>(kinds_.size()), tier);
}

ComponentId Topology::add_device(ComponentId id, Tier tier) {
  reserve_id(id, ComponentKind::Device);
  tiers_[id] = tier;
  device_ids_.insert(std::upper_bound(device_ids_.begin(), device_ids_.end(), id), id);
  if (tier == Tier::Host) {
    host_ids_.insert(std::upper_bound(host_ids_.begin(), host_ids_.end(), id), id);
  }
  return id;
}

ComponentId Topology::add_link(ComponentId a, ComponentId b) {
  return add_link(static_cast<ComponentId>(kinds_.size()), a, b);
}

ComponentId Topology::add_link(ComponentId id, ComponentId a, ComponentId b) {
  if (!is_device(a) || !is_device(b)) {
    fail(ErrorCode::InvalidArgument, "link endpoint is not a device");
  }
  if (a == b) fail(ErrorCode::InvalidArgument, "self-loop link on device " + std::to_string(a));
  reserve_id(id, ComponentKind::Link);
  link_table_[id] = Link{id, a, b};
  link_ids_.insert(std::upper_bound(link_ids_.begin(), link_ids_.end(), id), id);
  adjacency_[a].push_back({b, id});
  adjacency_[b].push_back({a, id});
  return id;
}

Tier Topology::tier(ComponentId device) const {
  if (!is_device(device)) fail(ErrorCode::InvalidArgument, "not a device: " + std::to_string(device));
  return tiers_[device];
}

const Link& Topology::link(ComponentId id) const {
  if (!is_link(id)) fail(ErrorCode::InvalidArgument, "not a link: " + std::to_string(id));
  return link_table_[id];
}

std::span<const Adjacency> Topology::neighbors(ComponentId device) const {
  if (!is_device(device)) fail(ErrorCode::InvalidArgument, "not a device: " + std::to_string(device));
  return adjacency_[device];
}

std::vector<ComponentId> Topology::devices_of_tier(Tier t) const {
  std::vector<ComponentId> out;
  for (auto d : device_ids_) {
    if (tiers_[d] == t) out.push_back(d);
  }
  return out;
}

bool Topology::is_host_link(ComponentId id) const {
  if (!is_link(id)) return false;
  const auto& l = link_table_[id];
  return tiers_[l.a] == Tier::Host || tiers_[l.b] == Tier::Host;
}

ComponentId Topology::host_uplink(ComponentId host) const {
  if (!is_host(host)) fail(ErrorCode::InvalidArgument, "not a host: " + std::to_string(host));
  const auto& adj = adjacency_[host];
  if (adj.size() != 1) {
    fail(ErrorCode::InvalidArgument, "host " + std::to_string(host) + " must have exactly one uplink");
  }
  return adj.front().link;
}

ComponentId Topology::host_tor(ComponentId host) const {
  return link(host_uplink(host)).other(host);
}

std::vector<ComponentId> Topology::inter_switch_links() const {
  std::vector<ComponentId> out;
  for (auto id : link_ids_) {
    if (!is_host_link(id)) out.push_back(id);
  }
  return out;
}

void Topology::write(std::ostream& out) const {
  out << "# flock topology\n";
  for (auto d : device_ids_) {
    if (tiers_[d] == Tier::Host) {
      const auto& adj = adjacency_[d];
      ComponentId tor = adj.empty() ? kNoComponent : adj.front().peer;
      out << "host " << d << ' ' << tor << '\n';
    } else {
      out << "device " << d << ' ' << to_string(tiers_[d]) << '\n';
    }
  }
  for (auto l : link_ids_) {
    const auto& lk = link_table_[l];
    out << "link " << l << ' ' << lk.a << ' ' << lk.b << '\n';
  }
}

std::string Topology::serialize() const {
  std::ostringstream out;
  write(out);
  return out.str();
}

namespace {

ComponentId parse_id(const std::string& token, std::size_t line_no) {
  if (token.empty() || token.find_first_not_of("0123456789") != std::string::npos) {
    fail(ErrorCode::Parse, "line " + std::to_string(line_no) + ": bad id '" + token + "'");
  }
  unsigned long long v = std::stoull(token);
  if (v >= kNoComponent) fail(ErrorCode::Parse, "line " + std::to_string(line_no) + ": id out of range");
  return static_cast<ComponentId>(v);
}

}  // namespace

Topology Topology::parse(std::istream& in) {
  struct Pending {
    std::size_t line;
    ComponentId id, a, b;
  };
  std::vector<std::pair<ComponentId, Tier>> devices;
  std::vector<Pending> hosts;  // id, tor
  std::vector<Pending> links;
  std::set<ComponentId> seen;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string word;
    if (!(ls >> word)) continue;
    std::vector<std::string> args;
    for (std::string t; ls >> t;) args.push_back(t);
    auto need = [&](std::size_t n) {
      if (args.size() != n) {
        fail(ErrorCode::Parse, "line " + std::to_string(line_no) + ": '" + word + "' expects " +
                                   std::to_string(n) + " fields");
      }
    };
    auto claim = [&](ComponentId id) {
      if (!seen.insert(id).second) {
        fail(ErrorCode::Parse, "line " + std::to_string(line_no) + ": duplicate id " + std::to_string(id));
      }
    };
    if (word == "device") {
      need(2);
      ComponentId id = parse_id(args[0], line_no);
      claim(id);
      Tier t;
      try {
        t = parse_tier(args[1]);
      } catch (const Error& e) {
        fail(ErrorCode::Parse, "line " + std::to_string(line_no) + ": " + e.what());
      }
      if (t == Tier::Host) {
        fail(ErrorCode::Parse, "line " + std::to_string(line_no) + ": hosts are declared with 'host'");
      }
      devices.emplace_back(id, t);
    } else if (word == "host") {
      need(2);
      ComponentId id = parse_id(args[0], line_no);
      claim(id);
      hosts.push_back({line_no, id, parse_id(args[1], line_no), 0});
    } else if (word == "link") {
      need(3);
      ComponentId id = parse_id(args[0], line_no);
      claim(id);
      links.push_back({line_no, id, parse_id(args[1], line_no), parse_id(args[2], line_no)});
    } else {
      fail(ErrorCode::Parse, "line " + std::to_string(line_no) + ": unknown record '" + word + "'");
    }
  }

  Topology topo;
  for (auto [id, t] : devices) topo.add_device(id, t);
  for (const auto& h : hosts) topo.add_device(h.id, Tier::Host);
  for (const auto& l : links) {
    if (!topo.is_device(l.a) || !topo.is_device(l.b)) {
      fail(ErrorCode::Parse, "line " + std::to_string(l.line) + ": link endpoint is not a device");
    }
    if (l.a == l.b) fail(ErrorCode::Parse, "line " + std::to_string(l.line) + ": self-loop link");
    topo.add_link(l.id, l.a, l.b);
  }
  for (const auto& h : hosts) {
    const auto adj = topo.neighbors(h.id);
    if (adj.size() != 1 || adj.front().peer != h.a) {
      fail(ErrorCode::Parse, "line " + std::to_string(h.line) + ": host " + std::to_string(h.id) +
                                 " must have exactly one link, to switch " + std::to_string(h.a));
    }
  }
  return topo;
}

Topology Topology::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open topology file " + path);
  return parse(in);
}

void Topology::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::Io, "cannot write topology file " + path);
  write(out);
}

std::uint64_t Topology::checksum() const {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : serialize()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

// ------------------------------------------------------------- generators

Topology build_fat_tree(int k, int hosts_per_tor) {
  if (k < 2 || k % 2 != 0) fail(ErrorCode::InvalidArgument, "fat-tree k must be even and >= 2");
  if (hosts_per_tor < 1) fail(ErrorCode::InvalidArgument, "hosts_per_tor must be >= 1");
  const int half = k / 2;
  Topology topo;
  std::vector<ComponentId> cores, aggs, tors, hosts;
  for (int i = 0; i < half * half; ++i) cores.push_back(topo.add_device(Tier::Core));
  for (int p = 0; p < k; ++p) {
    for (int i = 0; i < half; ++i) aggs.push_back(topo.add_device(Tier::Agg));
    for (int i = 0; i < half; ++i) tors.push_back(topo.add_device(Tier::ToR));
  }
  for (std::size_t t = 0; t < tors.size(); ++t) {
    for (int h = 0; h < hosts_per_tor; ++h) hosts.push_back(topo.add_device(Tier::Host));
  }
  // Aggregation switch j of any pod connects to cores [j*half, (j+1)*half).
  for (int p = 0; p < k; ++p) {
    for (int j = 0; j < half; ++j) {
      for (int c = 0; c < half; ++c) topo.add_link(aggs[p * half + j], cores[j * half + c]);
    }
  }
  for (int p = 0; p < k; ++p) {
    for (int t = 0; t < half; ++t) {
      for (int j = 0; j < half; ++j) topo.add_link(tors[p * half + t], aggs[p * half + j]);
    }
  }
  for (std::size_t h = 0; h < hosts.size(); ++h) {
    topo.add_link(hosts[h], tors[h / hosts_per_tor]);
  }
  return topo;
}

Topology build_two_tier(int spines, int leaves, int hosts_per_leaf) {
  if (spines < 1 || leaves < 1 || hosts_per_leaf < 1) {
    fail(ErrorCode::InvalidArgument, "two-tier arguments must all be >= 1");
  }
  Topology topo;
  std::vector<ComponentId> sp, lf, hs;
  for (int i = 0; i < spines; ++i) sp.push_back(topo.add_device(Tier::Core));
  for (int i = 0; i < leaves; ++i) lf.push_back(topo.add_device(Tier::ToR));
  for (int i = 0; i < leaves * hosts_per_leaf; ++i) hs.push_back(topo.add_device(Tier::Host));
  for (auto l : lf) {
    for (auto s : sp) topo.add_link(l, s);
  }
  for (std::size_t h = 0; h < hs.size(); ++h) topo.add_link(hs[h], lf[h / hosts_per_leaf]);
  return topo;
}

namespace {

// Every pair of host-bearing switches shares an up-reachable device.
bool all_hosts_routable(const Topology& topo) {
  const std::size_t n = topo.component_count();
  const std::size_t words = (n + 63) / 64;
  std::vector<std::vector<std::uint64_t>> up(n);
  std::vector<ComponentId> order = topo.devices();
  std::sort(order.begin(), order.end(), [&](ComponentId x, ComponentId y) {
    return topo.tier(x) > topo.tier(y);
  });
  for (auto d : order) {
    auto& bits = up[d];
    bits.assign(words, 0);
    bits[d / 64] |= 1ull << (d % 64);
    for (const auto& a : topo.neighbors(d)) {
      if (topo.tier(a.peer) > topo.tier(d)) {
        for (std::size_t w = 0; w < words; ++w) bits[w] |= up[a.peer][w];
      }
    }
  }
  std::vector<ComponentId> edges;
  for (auto h : topo.hosts()) {
    if (topo.neighbors(h).size() != 1) return false;
    edges.push_back(topo.host_tor(h));
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  for (std::size_t i = 0; i < edges.size(); ++i) {
    for (std::size_t j = i + 1; j < edges.size(); ++j) {
      bool meet = false;
      for (std::size_t w = 0; w < words && !meet; ++w) meet = (up[edges[i]][w] & up[edges[j]][w]) != 0;
      if (!meet) return false;
    }
  }
  return true;
}

Topology without(const Topology& topo, const std::set<ComponentId>& removed) {
  Topology out;
  for (auto d : topo.devices()) out.add_device(d, topo.tier(d));
  for (auto l : topo.links()) {
    if (removed.count(l)) continue;
    const auto& lk = topo.link(l);
    out.add_link(l, lk.a, lk.b);
  }
  return out;
}

}  // namespace

Topology omit_links(const Topology& topo, double fraction, std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) {
    fail(ErrorCode::InvalidArgument, "omit fraction must be in [0,1]");
  }
  auto candidates = topo.inter_switch_links();
  const auto count = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(candidates.size())));
  if (count == 0) return topo;
  std::mt19937_64 rng(seed);
  constexpr int kAttempts = 200;
  for (int attempt = 0; attempt < kAttempts; ++attempt) {
    auto pool = candidates;
    std::shuffle(pool.begin(), pool.end(), rng);
    std::set<ComponentId> removed(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(count));
    Topology out = without(topo, removed);
    if (all_hosts_routable(out)) return out;
  }
  fail(ErrorCode::Infeasible, "cannot omit " + std::to_string(count) +
                                  " links without disconnecting hosts (tried " +
                                  std::to_string(kAttempts) + " samples)");
}

// ----------------------------------------------------------------- Router

Router::Router(const Topology& topo) : topo_(&topo) {}

Router::SwitchRoutes Router::compute_switch_routes(ComponentId from, ComponentId to) const {
  const Topology& topo = *topo_;
  // Up-only walks from a switch: device reached -> list of walks ending there.
  auto climb = [&](ComponentId start) {
    std::map<ComponentId, std::vector<Path>> reach;
    std::vector<Path> stack{Path{start}};
    while (!stack.empty()) {
      Path walk = std::move(stack.back());
      stack.pop_back();
      ComponentId at = walk.back();
      for (const auto& a : topo.neighbors(at)) {
        if (topo.tier(a.peer) <= topo.tier(at)) continue;
        Path next = walk;
        next.push_back(a.link);
        next.push_back(a.peer);
        stack.push_back(std::move(next));
      }
      reach[at].push_back(std::move(walk));
    }
    return reach;
  };
  SwitchRoutes routes;
  if (from == to) {
    routes.paths.push_back(Path{from});
    return routes;
  }
  auto up_from = climb(from);
  auto up_to = climb(to);
  std::size_t best = std::numeric_limits<std::size_t>::max();
  for (const auto& [meet, walks_a] : up_from) {
    auto it = up_to.find(meet);
    if (it == up_to.end()) continue;
    for (const auto& a : walks_a) {
      for (const auto& b : it->second) {
        std::size_t len = a.size() + b.size() - 1;
        if (len > best) continue;
        if (len < best) {
          best = len;
          routes.paths.clear();
        }
        Path p = a;
        p.insert(p.end(), b.rbegin() + 1, b.rend());
        routes.paths.push_back(std::move(p));
      }
    }
  }
  std::sort(routes.paths.begin(), routes.paths.end());
  routes.paths.erase(std::unique(routes.paths.begin(), routes.paths.end()), routes.paths.end());
  return routes;
}

const Router::SwitchRoutes& Router::switch_routes(ComponentId from, ComponentId to) const {
  const std::uint64_t key = (static_cast<std::uint64_t>(from) << 32) | to;
  std::lock_guard<std::mutex> lock(mutex_);
  auto it = cache_.find(key);
  if (it != cache_.end()) return *it->second;
  auto routes = std::make_unique<SwitchRoutes>(compute_switch_routes(from, to));
  auto& ref = *routes;
  cache_.emplace(key, std::move(routes));
  return ref;
}

Path Router::assemble(ComponentId src, ComponentId dst, const Path& inner) const {
  Path p;
  p.reserve(inner.size() + 2);
  p.push_back(topo_->host_uplink(src));
  p.insert(p.end(), inner.begin(), inner.end());
  if (topo_->is_host(dst)) p.push_back(topo_->host_uplink(dst));
  return p;
}

PathSet Router::ecmp_paths(ComponentId src, ComponentId dst) const {
  if (!topo_->is_host(src)) fail(ErrorCode::InvalidArgument, "route source must be a host");
  if (!topo_->is_device(dst)) fail(ErrorCode::InvalidArgument, "route destination must be a device");
  if (src == dst) fail(ErrorCode::InvalidArgument, "route source equals destination");
  ComponentId from = topo_->host_tor(src);
  ComponentId to = topo_->is_host(dst) ? topo_->host_tor(dst) : dst;
  const auto& inner = switch_routes(from, to);
  if (inner.paths.empty()) {
    fail(ErrorCode::Infeasible, "no route from " + std::to_string(src) + " to " + std::to_string(dst));
  }
  std::vector<Path> paths;
  paths.reserve(inner.paths.size());
  for (const auto& p : inner.paths) paths.push_back(assemble(src, dst, p));
  return PathSet(std::move(paths));
}

std::shared_ptr<const PathSet> Router::shared_paths(ComponentId src, ComponentId dst) const {
  return std::make_shared<const PathSet>(ecmp_paths(src, dst));
}

std::size_t Router::path_count(ComponentId src, ComponentId dst) const {
  ComponentId from = topo_->host_tor(src);
  ComponentId to = topo_->is_host(dst) ? topo_->host_tor(dst) : dst;
  return switch_routes(from, to).paths.size();
}

Path Router::path(ComponentId src, ComponentId dst, std::size_t index) const {
  ComponentId from = topo_->host_tor(src);
  ComponentId to = topo_->is_host(dst) ? topo_->host_tor(dst) : dst;
  const auto& inner = switch_routes(from, to);
  if (index >= inner.paths.size()) fail(ErrorCode::InvalidArgument, "path index out of range");
  return assemble(src, dst, inner.paths[index]);
}

bool Router::routable(ComponentId src, ComponentId dst) const {
  return path_count(src, dst) > 0;
}

bool Router::contains(ComponentId src, ComponentId dst, std::span<const ComponentId> path) const {
  if (!topo_->is_host(src) || !topo_->is_device(dst) || src == dst) return false;
  const bool to_host = topo_->is_host(dst);
  const std::size_t trim = to_host ? 2 : 1;
  if (path.size() < trim + 1 || path.front() != topo_->host_uplink(src)) return false;
  if (to_host && path.back() != topo_->host_uplink(dst)) return false;
  ComponentId from = topo_->host_tor(src);
  ComponentId to = to_host ? topo_->host_tor(dst) : dst;
  const auto& inner = switch_routes(from, to).paths;
  Path middle(path.begin() + 1, path.end() - (to_host ? 1 : 0));
  return std::binary_search(inner.begin(), inner.end(), middle);
}

PathSet ecmp_paths(const Topology& topo, ComponentId src, ComponentId dst) {
  return Router(topo).ecmp_paths(src, dst);
}

// ---------------------------------------------------- equivalence classes

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

struct Signature {
  std::uint64_t h1 = 0, h2 = 0, count = 0;
  auto operator<=>(const Signature&) const = default;
  void add(const Signature& o) {
    h1 += o.h1;
    h2 += o.h2;
    count += o.count;
  }
};

Signature pair_signature(ComponentId s, ComponentId d) {
  if (s > d) std::swap(s, d);
  std::uint64_t key = (static_cast<std::uint64_t>(s) << 32) | d;
  return {splitmix64(key), splitmix64(key ^ 0x5bd1e9955bd1e995ull), 1};
}

}  // namespace

std::vector<EquivalenceClass> equivalence_classes(const Topology& topo) {
  Router router(topo);
  // Host pairs are grouped by their edge switches; the switch-level route
  // between two edges is shared by every host pair across them.
  std::map<ComponentId, std::vector<ComponentId>> hosts_by_edge;
  for (auto h : topo.hosts()) hosts_by_edge[topo.host_tor(h)].push_back(h);
  std::vector<ComponentId> edges;
  for (const auto& [e, _] : hosts_by_edge) edges.push_back(e);

  std::vector<Signature> sig(topo.component_count());
  for (std::size_t i = 0; i < edges.size(); ++i) {
    for (std::size_t j = i; j < edges.size(); ++j) {
      const auto& hi = hosts_by_edge[edges[i]];
      const auto& hj = hosts_by_edge[edges[j]];
      Signature block;
      for (auto s : hi) {
        for (auto d : hj) {
          if (i == j && d <= s) continue;
          auto ps = pair_signature(s, d);
          block.add(ps);
          sig[topo.host_uplink(s)].add(ps);
          sig[topo.host_uplink(d)].add(ps);
        }
      }
      if (block.count == 0 || i == j) continue;
      auto inner = router.ecmp_paths(hi.front(), hj.front());
      for (auto c : inner.components()) {
        if (topo.is_link(c) && !topo.is_host_link(c)) sig[c].add(block);
      }
    }
  }
  std::map<Signature, std::vector<ComponentId>> groups;
  for (auto l : topo.links()) groups[sig[l]].push_back(l);
  std::vector<EquivalenceClass> classes;
  classes.reserve(groups.size());
  for (auto& [_, members] : groups) classes.push_back({std::move(members)});
  std::sort(classes.begin(), classes.end(), [](const auto& x, const auto& y) {
    return x.members.front() < y.members.front();
  });
  return classes;
}

bool ReducedTopology::nontrivial() const {
  return std::any_of(classes.begin(), classes.end(), [](const auto& c) { return c.members.size() > 1; });
}

std::vector<std::uint32_t> ReducedTopology::reduce(std::span<const ComponentId> path) const {
  std::vector<std::uint32_t> out;
  for (auto c : path) {
    auto it = class_of.find(c);
    if (it != class_of.end()) out.push_back(it->second);
  }
  return out;
}

std::vector<std::vector<std::uint32_t>> ReducedTopology::reduce(const PathSet& paths) const {
  std::vector<std::vector<std::uint32_t>> out;
  for (std::size_t i = 0; i < paths.size(); ++i) out.push_back(reduce(paths[i]));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

ReducedTopology reduced_topology(const Topology& topo) {
  ReducedTopology r;
  r.classes = equivalence_classes(topo);
  for (std::uint32_t i = 0; i < r.classes.size(); ++i) {
    r.representative.push_back(r.classes[i].members.front());
    for (auto l : r.classes[i].members) r.class_of[l] = i;
  }
  return r;
}

}  // namespace flock
