#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "flock/common.hpp"

namespace flock {

enum class Tier : std::uint8_t { Host = 0, ToR = 1, Agg = 2, Core = 3 };
enum class ComponentKind : std::uint8_t { None, Link, Device };

const char* to_string(Tier tier);
Tier parse_tier(const std::string& text);

struct Device {
  ComponentId id = kNoComponent;
  Tier tier = Tier::Host;
};

struct Link {
  ComponentId id = kNoComponent;
  ComponentId a = kNoComponent;
  ComponentId b = kNoComponent;

  ComponentId other(ComponentId end) const { return end == a ? b : a; }
};

struct Adjacency {
  ComponentId peer;
  ComponentId link;
};

// Ordered sequence of links and transit devices. Endpoint hosts are not part
// of a path; a non-host destination (probe target) is.
using Path = std::vector<ComponentId>;

// A set of equal-cost paths stored flat. Paths are unique and kept in
// lexicographic order of their component sequences.
class PathSet {
 public:
  PathSet() = default;
  explicit PathSet(std::vector<Path> paths);

  std::size_t size() const { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  bool empty() const { return size() == 0; }
  std::span<const ComponentId> operator[](std::size_t i) const {
    return {flat_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
  }
  // Index of `path` in the set, if present.
  std::optional<std::size_t> find(std::span<const ComponentId> path) const;
  // Sorted distinct components over all paths.
  std::vector<ComponentId> components() const;

  friend bool operator==(const PathSet&, const PathSet&) = default;

 private:
  std::vector<ComponentId> flat_;
  std::vector<std::uint32_t> offsets_;
};

class Topology {
 public:
  Topology() = default;

  ComponentId add_device(Tier tier);
  ComponentId add_device(ComponentId id, Tier tier);
  ComponentId add_link(ComponentId a, ComponentId b);
  ComponentId add_link(ComponentId id, ComponentId a, ComponentId b);

  // One past the largest id in use.
  std::size_t component_count() const { return kinds_.size(); }
  ComponentKind kind(ComponentId id) const {
    return id < kinds_.size() ? kinds_[id] : ComponentKind::None;
  }
  bool is_link(ComponentId id) const { return kind(id) == ComponentKind::Link; }
  bool is_device(ComponentId id) const { return kind(id) == ComponentKind::Device; }
  bool exists(ComponentId id) const { return kind(id) != ComponentKind::None; }

  Tier tier(ComponentId device) const;
  const Link& link(ComponentId id) const;
  std::span<const Adjacency> neighbors(ComponentId device) const;

  const std::vector<ComponentId>& devices() const { return device_ids_; }
  const std::vector<ComponentId>& links() const { return link_ids_; }
  const std::vector<ComponentId>& hosts() const { return host_ids_; }
  std::vector<ComponentId> devices_of_tier(Tier tier) const;

  bool is_host(ComponentId id) const { return is_device(id) && tier(id) == Tier::Host; }
  // A link touching a host.
  bool is_host_link(ComponentId id) const;
  // The single uplink of a host and the switch at its other end.
  ComponentId host_uplink(ComponentId host) const;
  ComponentId host_tor(ComponentId host) const;

  // Links with both endpoints being switches.
  std::vector<ComponentId> inter_switch_links() const;

  void write(std::ostream& out) const;
  std::string serialize() const;
  static Topology parse(std::istream& in);
  static Topology load(const std::string& path);
  void save(const std::string& path) const;
  // FNV-1a over the canonical serialization.
  std::uint64_t checksum() const;

  friend bool operator==(const Topology& x, const Topology& y) {
    return x.serialize() == y.serialize();
  }

 private:
  void reserve_id(ComponentId id, ComponentKind kind);

  std::vector<ComponentKind> kinds_;
  std::vector<Tier> tiers_;          // indexed by id, meaningful for devices
  std::vector<Link> link_table_;     // indexed by id, meaningful for links
  std::vector<std::vector<Adjacency>> adjacency_;  // indexed by id
  std::vector<ComponentId> device_ids_;
  std::vector<ComponentId> link_ids_;
  std::vector<ComponentId> host_ids_;
};

// Fat-tree with k pods. Ids: cores first, then per pod the aggregation then
// ToR switches, then hosts ToR-major; links follow as agg-core (agg-major),
// ToR-agg (ToR-major) and host uplinks (host-major).
Topology build_fat_tree(int k, int hosts_per_tor);

// Leaf-spine Clos. Spines get tier Core, leaves tier ToR.
Topology build_two_tier(int spines, int leaves, int hosts_per_leaf);

// Removes floor(fraction * |inter-switch links|) inter-switch links chosen
// uniformly under `seed`, resampling until every host pair stays routable.
Topology omit_links(const Topology& topo, double fraction, std::uint64_t seed);

// Valley-free shortest-path routing with a thread-safe cache of switch-level
// routes. Paths from a host start with its uplink; paths towards a host end
// with that host's uplink.
class Router {
 public:
  explicit Router(const Topology& topo);

  const Topology& topology() const { return *topo_; }

  // All shortest up-down paths from host `src` to device `dst` (host or switch).
  PathSet ecmp_paths(ComponentId src, ComponentId dst) const;
  std::shared_ptr<const PathSet> shared_paths(ComponentId src, ComponentId dst) const;
  std::size_t path_count(ComponentId src, ComponentId dst) const;
  Path path(ComponentId src, ComponentId dst, std::size_t index) const;
  bool routable(ComponentId src, ComponentId dst) const;
  // Whether `path` is one of ecmp_paths(src, dst).
  bool contains(ComponentId src, ComponentId dst, std::span<const ComponentId> path) const;

 private:
  struct SwitchRoutes {
    std::vector<Path> paths;  // between two switches, endpoints included
  };
  const SwitchRoutes& switch_routes(ComponentId from, ComponentId to) const;
  SwitchRoutes compute_switch_routes(ComponentId from, ComponentId to) const;
  Path assemble(ComponentId src, ComponentId dst, const Path& inner) const;

  const Topology* topo_;
  mutable std::mutex mutex_;
  mutable std::unordered_map<std::uint64_t, std::unique_ptr<SwitchRoutes>> cache_;
};

PathSet ecmp_paths(const Topology& topo, ComponentId src, ComponentId dst);

struct EquivalenceClass {
  std::vector<ComponentId> members;  // sorted link ids
};

// Groups links by the set of host pairs whose ECMP path sets contain them.
std::vector<EquivalenceClass> equivalence_classes(const Topology& topo);

// Links collapsed per equivalence class. A class failure is evaluated as a
// failure of its representative (smallest member) link only.
struct ReducedTopology {
  std::vector<EquivalenceClass> classes;
  std::vector<ComponentId> representative;           // per class
  std::unordered_map<ComponentId, std::uint32_t> class_of;  // link -> class

  std::size_t link_count() const { return classes.size(); }
  bool nontrivial() const;
  // Class sequence traversed by one path (devices dropped).
  std::vector<std::uint32_t> reduce(std::span<const ComponentId> path) const;
  // Distinct reduced paths of a path set.
  std::vector<std::vector<std::uint32_t>> reduce(const PathSet& paths) const;
};

ReducedTopology reduced_topology(const Topology& topo);

}  // namespace flock
