#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "flock/common.hpp"
#include "flock/telemetry.hpp"
#include "flock/topology.hpp"

namespace flock {

struct ModelParams {
  double p_g = 1e-3;
  double p_b = 2e-2;
  double rho_link = 1e-3;
  double device_prior_log_factor = 5.0;
  double rtt_threshold_ms = 10.0;
  // vote007's relative score threshold.
  double vote_threshold = 0.5;
  // Sherlock's bound on hypothesis size.
  int max_failures = 2;

  void validate() const;
  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

void write_params(std::ostream& out, const ModelParams& params);
ModelParams parse_params(std::istream& in);
ModelParams load_params(const std::string& path);
void save_params(const std::string& path, const ModelParams& params);

// ln(rho / (1 - rho)).
double link_log_odds(const ModelParams& params);
// The device penalty is the link penalty scaled by device_prior_log_factor.
double device_log_odds(const ModelParams& params);
double prior_log_odds(const Topology& topo, ComponentId component, const ModelParams& params);

// r ln(p_b/p_g) + (t - r) ln((1-p_b)/(1-p_g)).
double flow_log_ratio(std::uint64_t t, std::uint64_t r, const ModelParams& params);

// ln((b e^x + w - b) / w): one flow's log-likelihood under a hypothesis that
// fails b of its w paths, relative to the no-failure hypothesis.
double flow_ll(std::size_t w, std::size_t b, double log_ratio);

// A sorted set of failed component ids.
class Hypothesis {
 public:
  Hypothesis() = default;
  explicit Hypothesis(std::vector<ComponentId> ids);

  bool insert(ComponentId id);
  bool contains(ComponentId id) const;
  std::size_t size() const { return ids_.size(); }
  bool empty() const { return ids_.empty(); }
  const std::vector<ComponentId>& ids() const { return ids_; }
  auto begin() const { return ids_.begin(); }
  auto end() const { return ids_.end(); }

  friend bool operator==(const Hypothesis&, const Hypothesis&) = default;

 private:
  std::vector<ComponentId> ids_;
};

// Number of paths of `paths` touching a member of `h`.
std::size_t failed_paths(const PathSet& paths, const Hypothesis& h);

double flow_log_likelihood(const SelectedFlow& flow, const Hypothesis& h, const ModelParams& params);

// Flow terms plus one log-odds prior term per member, relative to H = {}.
double hypothesis_log_likelihood(std::span<const SelectedFlow> flows, const Hypothesis& h,
                                 const Topology& topo, const ModelParams& params);

void write_hypothesis(std::ostream& out, const Hypothesis& h);
void save_hypothesis(const std::string& path, const Hypothesis& h);
Hypothesis parse_hypothesis(std::istream& in, const Topology& topo);
Hypothesis load_hypothesis(const std::string& path, const Topology& topo);

}  // namespace flock
