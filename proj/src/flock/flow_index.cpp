#include "flock/flow_index.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace flock {

std::size_t SearchSpace::candidate_count() const {
  return static_cast<std::size_t>(std::count(candidate.begin(), candidate.end(), 1));
}

SearchSpace full_search_space(const Topology& topo, bool include_devices) {
  SearchSpace s;
  s.candidate.assign(topo.component_count(), 0);
  s.device.assign(topo.component_count(), 0);
  for (auto l : topo.links()) s.candidate[l] = 1;
  for (auto d : topo.devices()) {
    s.device[d] = 1;
    if (include_devices && !topo.is_host(d)) s.candidate[d] = 1;
  }
  return s;
}

SearchSpace restricted_search_space(const Topology& topo, std::span<const ComponentId> allowed) {
  SearchSpace s;
  s.candidate.assign(topo.component_count(), 0);
  s.device.assign(topo.component_count(), 0);
  for (auto d : topo.devices()) s.device[d] = 1;
  for (auto c : allowed) {
    if (!topo.exists(c)) fail(ErrorCode::InvalidArgument, "unknown component " + std::to_string(c));
    s.candidate[c] = 1;
  }
  return s;
}

std::uint32_t ShapeView::local(ComponentId c) const {
  auto it = std::lower_bound(comps.begin(), comps.end(), c);
  if (it == comps.end() || *it != c) return static_cast<std::uint32_t>(comps.size());
  return static_cast<std::uint32_t>(it - comps.begin());
}

namespace {

std::uint64_t hash_paths(const PathSet& ps) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&](std::uint64_t v) {
    h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  };
  for (std::size_t i = 0; i < ps.size(); ++i) {
    for (auto c : ps[i]) mix(c);
    mix(0xffffffffull);
  }
  return h;
}

}  // namespace

FlowIndex::FlowIndex(std::span<const SelectedFlow> flows, const SearchSpace& space) {
  const std::size_t n = space.component_count();
  flow_shape_.reserve(flows.size());
  t_.reserve(flows.size());
  r_.reserve(flows.size());
  shape_comp_offsets_.push_back(0);
  path_offsets_.push_back(0);

  std::unordered_map<const PathSet*, std::uint32_t> by_ptr;
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> by_hash;
  std::vector<const PathSet*> source;
  std::vector<ComponentId> scratch;

  auto intern = [&](const PathSet& ps) -> std::uint32_t {
    auto hit = by_ptr.find(&ps);
    if (hit != by_ptr.end()) return hit->second;
    const std::uint64_t h = hash_paths(ps);
    auto& bucket = by_hash[h];
    for (auto s : bucket) {
      if (*source[s] == ps) {
        by_ptr.emplace(&ps, s);
        return s;
      }
    }
    const auto id = static_cast<std::uint32_t>(source.size());
    source.push_back(&ps);
    bucket.push_back(id);
    by_ptr.emplace(&ps, id);

    scratch.clear();
    for (std::size_t i = 0; i < ps.size(); ++i) {
      for (auto c : ps[i]) {
        if (c < n && space.candidate[c]) scratch.push_back(c);
      }
    }
    std::sort(scratch.begin(), scratch.end());
    scratch.erase(std::unique(scratch.begin(), scratch.end()), scratch.end());
    shape_comps_.insert(shape_comps_.end(), scratch.begin(), scratch.end());
    shape_counts_.resize(shape_comps_.size(), 0);
    shape_comp_offsets_.push_back(static_cast<std::uint32_t>(shape_comps_.size()));
    shape_path_ref_.push_back(static_cast<std::uint32_t>(path_offsets_.size() - 1));
    widths_.push_back(static_cast<std::uint32_t>(ps.size()));
    for (std::size_t i = 0; i < ps.size(); ++i) {
      const std::uint32_t start = static_cast<std::uint32_t>(locals_.size());
      for (auto c : ps[i]) {
        if (c >= n || !space.candidate[c]) continue;
        auto li = static_cast<std::uint32_t>(std::lower_bound(scratch.begin(), scratch.end(), c) - scratch.begin());
        locals_.push_back(li);
      }
      // Keep locals unique per path even if a path repeats a component.
      std::sort(locals_.begin() + start, locals_.end());
      locals_.erase(std::unique(locals_.begin() + start, locals_.end()), locals_.end());
      path_offsets_.push_back(static_cast<std::uint32_t>(locals_.size()));
    }
    max_t_ = std::max(max_t_, scratch.size());
    max_w_ = std::max<std::size_t>(max_w_, ps.size());
    return id;
  };

  for (const auto& f : flows) {
    if (!f.paths || f.paths->empty()) fail(ErrorCode::InvalidArgument, "flow without paths");
    if (f.r > f.t) fail(ErrorCode::InvalidArgument, "flow with r > t");
    flow_shape_.push_back(intern(*f.paths));
    t_.push_back(f.t);
    r_.push_back(f.r);
  }
  for (std::uint32_t s = 0; s < shape_count(); ++s) {
    ShapeView v = shape_view(s);
    for (std::size_t i = 0; i < v.w; ++i) {
      for (auto li : v.path(i)) ++shape_counts_[shape_comp_offsets_[s] + li];
    }
  }

  by_comp_offsets_.assign(n + 1, 0);
  for (auto s : flow_shape_) {
    for (std::uint32_t i = shape_comp_offsets_[s]; i < shape_comp_offsets_[s + 1]; ++i) {
      ++by_comp_offsets_[shape_comps_[i] + 1];
    }
  }
  for (std::size_t c = 0; c < n; ++c) {
    max_d_ = std::max<std::size_t>(max_d_, by_comp_offsets_[c + 1]);
    by_comp_offsets_[c + 1] += by_comp_offsets_[c];
  }
  by_comp_.resize(by_comp_offsets_[n]);
  std::vector<std::uint32_t> fill(by_comp_offsets_.begin(), by_comp_offsets_.end() - 1);
  for (std::uint32_t f = 0; f < flow_shape_.size(); ++f) {
    const auto s = flow_shape_[f];
    for (std::uint32_t i = shape_comp_offsets_[s]; i < shape_comp_offsets_[s + 1]; ++i) {
      by_comp_[fill[shape_comps_[i]]++] = f;
    }
  }
}

ShapeView FlowIndex::shape_view(std::uint32_t s) const {
  ShapeView v;
  const auto b = shape_comp_offsets_[s], e = shape_comp_offsets_[s + 1];
  v.comps = {shape_comps_.data() + b, e - b};
  v.count = {shape_counts_.data() + b, e - b};
  v.w = widths_[s];
  v.path_offsets = {path_offsets_.data() + shape_path_ref_[s], static_cast<std::size_t>(v.w) + 1};
  v.locals = {locals_.data(), locals_.size()};
  return v;
}

std::vector<double> log_ratios(const FlowIndex& index, const ModelParams& params) {
  std::vector<double> x(index.flow_count());
  const double up = std::log(params.p_b) - std::log(params.p_g);
  const double down = std::log1p(-params.p_b) - std::log1p(-params.p_g);
  for (std::size_t f = 0; f < x.size(); ++f) {
    const auto t = index.t(f), r = index.r(f);
    double v = 0.0;
    if (r > 0) v += static_cast<double>(r) * up;
    if (t > r) v += static_cast<double>(t - r) * down;
    x[f] = v;
  }
  return x;
}

}  // namespace flock
