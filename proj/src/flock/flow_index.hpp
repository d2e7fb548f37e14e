#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "flock/model.hpp"
#include "flock/telemetry.hpp"
#include "flock/topology.hpp"

namespace flock {

// Components eligible to enter a hypothesis.
struct SearchSpace {
  std::vector<std::uint8_t> candidate;  // by component id
  std::vector<std::uint8_t> device;     // by component id

  std::size_t component_count() const { return candidate.size(); }
  std::size_t candidate_count() const;
  double prior(ComponentId c, const ModelParams& params) const {
    return device[c] ? device_log_odds(params) : link_log_odds(params);
  }
};

// Every link and, optionally, every switch. Hosts never are candidates.
SearchSpace full_search_space(const Topology& topo, bool include_devices = true);
// Only the listed components.
SearchSpace restricted_search_space(const Topology& topo, std::span<const ComponentId> allowed);

// One flow's path set reduced to the candidate components it touches.
struct ShapeView {
  std::span<const ComponentId> comps;    // L_F, sorted
  std::span<const std::uint32_t> count;  // paths containing comps[i]
  std::span<const std::uint32_t> path_offsets;
  std::span<const std::uint32_t> locals;  // per path, indices into comps
  std::uint32_t w;

  std::span<const std::uint32_t> path(std::size_t i) const {
    return locals.subspan(path_offsets[i], path_offsets[i + 1] - path_offsets[i]);
  }
  // Index of c in comps; comps.size() when absent.
  std::uint32_t local(ComponentId c) const;
};

// Flow/component incidence for a selected flow list. Flows with identical
// path sets share one interned shape.
class FlowIndex {
 public:
  FlowIndex(std::span<const SelectedFlow> flows, const SearchSpace& space);

  std::size_t flow_count() const { return flow_shape_.size(); }
  std::size_t component_count() const { return by_comp_offsets_.size() - 1; }
  std::size_t shape_count() const { return shape_comp_offsets_.size() - 1; }

  ShapeView shape(std::size_t flow) const { return shape_view(flow_shape_[flow]); }
  std::uint32_t shape_id(std::size_t flow) const { return flow_shape_[flow]; }
  std::uint64_t t(std::size_t flow) const { return t_[flow]; }
  std::uint64_t r(std::size_t flow) const { return r_[flow]; }
  std::span<const std::uint32_t> flows_of(ComponentId c) const {
    return {by_comp_.data() + by_comp_offsets_[c], by_comp_offsets_[c + 1] - by_comp_offsets_[c]};
  }

  // Largest |L_F| and largest |flows(c)|.
  std::size_t max_components_per_flow() const { return max_t_; }
  std::size_t max_flows_per_component() const { return max_d_; }
  std::size_t max_width() const { return max_w_; }

 private:
  ShapeView shape_view(std::uint32_t s) const;

  std::vector<std::uint32_t> flow_shape_;
  std::vector<std::uint64_t> t_, r_;

  std::vector<std::uint32_t> shape_comp_offsets_;
  std::vector<ComponentId> shape_comps_;
  std::vector<std::uint32_t> shape_counts_;
  std::vector<std::uint32_t> shape_path_ref_;  // per shape, first entry in path_offsets_
  std::vector<std::uint32_t> path_offsets_;
  std::vector<std::uint32_t> locals_;
  std::vector<std::uint32_t> widths_;

  std::vector<std::uint32_t> by_comp_offsets_;
  std::vector<std::uint32_t> by_comp_;

  std::size_t max_t_ = 0, max_d_ = 0, max_w_ = 0;
};

// Per-flow log ratio x_F for the given params.
std::vector<double> log_ratios(const FlowIndex& index, const ModelParams& params);

}  // namespace flock
