#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "flock/model.hpp"
#include "flock/telemetry.hpp"
#include "flock/topology.hpp"

namespace flock {

// Counter-based generator: stream(seed, key) gives an independent,
// reproducible sequence per key.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;
  explicit SplitMix64(std::uint64_t state) : state_(state) {}
  static SplitMix64 stream(std::uint64_t seed, std::uint64_t key);
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()();
  double uniform();  // [0, 1)
  std::uint64_t below(std::uint64_t n);

 private:
  std::uint64_t state_;
};

enum class ScenarioKind : std::uint8_t { SilentLinkDrops, DeviceFailure };

struct FailureSpec {
  ComponentId id = kNoComponent;  // a link, or a switch under DeviceFailure
  double drop_rate = 0.0;
};

struct FailureScenario {
  ScenarioKind kind = ScenarioKind::SilentLinkDrops;
  std::vector<FailureSpec> failures;
  // Extra failures drawn at simulation time, rates uniform in [min, max].
  int random_failures = 0;
  double min_rate = 0.001;
  double max_rate = 0.01;
  double device_link_fraction = 1.0;
};

void write_scenario(std::ostream& out, const FailureScenario& s);
FailureScenario parse_scenario(std::istream& in);
FailureScenario load_scenario(const std::string& path);

enum class TrafficKind : std::uint8_t { Uniform, Skewed };

struct TrafficPattern {
  TrafficKind kind = TrafficKind::Uniform;
  double hot_rack_fraction = 0.05;
  double hot_traffic_fraction = 0.5;
  double mean_flow_bytes = 200000.0;
  double pareto_shape = 1.05;
  std::uint32_t packet_bytes = 1000;
  std::uint64_t max_flow_packets = 10'000'000;
};

struct SimConfig {
  std::uint64_t app_flows = 10000;
  // Probe packets per host, each to a uniformly drawn core switch.
  std::uint64_t probes_per_host = 0;
  double noise_drop_max = 1e-4;
  std::uint64_t seed = 1;
  // Attach rtt_ms to application records: per-link latency plus a
  // retransmission penalty when the flow lost packets.
  bool emit_rtt = false;
  double link_latency_ms = 0.1;
  double retransmit_penalty_ms = 20.0;
};

// Realized per-link drop rates and ground truth of one simulation.
struct DropField {
  std::vector<double> rate;  // by component id, links only
  GroundTruth truth;
};

DropField realize_failures(const Topology& topo, const FailureScenario& scenario, double noise_drop_max,
                           std::uint64_t seed);

Trace simulate(const Topology& topo, const FailureScenario& scenario, const TrafficPattern& pattern,
               const SimConfig& config);

// Racks (ToR ids) designated hot for a seed.
std::vector<ComponentId> hot_racks(const Topology& topo, const TrafficPattern& pattern, std::uint64_t seed);

// Largest T({l1,l2}) / T({l1}) over link pairs, packet weighted, from the
// recorded paths. Kept as an exact fraction.
struct SkewStats {
  std::uint64_t shared = 0;  // T({l1,l2}) of the maximizing pair
  std::uint64_t total = 0;   // T({l1})
  ComponentId l1 = kNoComponent, l2 = kNoComponent;
  double epsilon() const { return total == 0 ? 0.0 : static_cast<double>(shared) / static_cast<double>(total); }
  // n failures <= alpha / 2 where alpha = 1 / epsilon.
  bool admits(std::uint64_t n_failures) const;
};

SkewStats measure_skew(std::span<const FlowRecord> records, const Topology& topo);

struct Theorem2Config {
  std::uint64_t packets_per_path = 1000;
  std::uint64_t t_min = 0;  // lower bound on packets crossing every link
  int max_attempts = 6;     // doublings of packets_per_path
};

struct Theorem2Certificate {
  double epsilon = 0.0;
  double alpha = 0.0;
  std::size_t failures = 0;
  double max_good_rate = 0.0;
  double min_failed_rate = 0.0;
  std::uint64_t min_link_packets = 0;
  std::uint64_t packets_per_path = 0;
};

struct Theorem2Instance {
  Trace trace;
  Theorem2Certificate certificate;
};

// Deterministic traffic: every ordered host pair sends packets_per_path
// packets over each of its ECMP paths. Only links fail.
Theorem2Instance make_theorem2_instance(const Topology& topo, std::size_t n_failures, const ModelParams& params,
                                        std::uint64_t seed, const Theorem2Config& config = {});

}  // namespace flock
