#include "flock/search.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>

namespace flock {

namespace {

constexpr long double kMasked = -std::numeric_limits<long double>::infinity();

// Memo of flow_ll(w, b, x) by b for the flow currently being processed.
class LlMemo {
 public:
  void reset(std::size_t max_w) {
    value_.assign(max_w + 1, 0.0);
    stamp_.assign(max_w + 1, 0);
    gen_ = 0;
  }
  void begin(std::uint32_t w, double x) {
    w_ = w;
    x_ = x;
    if (++gen_ == 0) {
      std::fill(stamp_.begin(), stamp_.end(), 0);
      gen_ = 1;
    }
  }
  double operator()(std::size_t b) {
    if (stamp_[b] != gen_) {
      stamp_[b] = gen_;
      value_[b] = flow_ll(w_, b, x_);
    }
    return value_[b];
  }

 private:
  std::vector<double> value_;
  std::vector<std::uint32_t> stamp_;
  std::uint32_t gen_ = 0;
  std::uint32_t w_ = 1;
  double x_ = 0.0;
};

using Clock = std::chrono::steady_clock;

std::uint64_t micros_since(Clock::time_point start) {
  return static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::microseconds>(Clock::now() - start).count());
}

}  // namespace

DeltaState compute_initial_delta(const FlowIndex& index, const SearchSpace& space,
                                 const ModelParams& params, std::span<const double> x,
                                 SearchCounters* counters) {
  const std::size_t n = space.component_count();
  DeltaState st;
  st.delta.assign(n, kMasked);
  st.in_h.assign(n, 0);
  for (std::size_t c = 0; c < n; ++c) {
    if (space.candidate[c]) st.delta[c] = space.prior(static_cast<ComponentId>(c), params);
  }
  LlMemo memo;
  memo.reset(index.max_width());
  for (std::size_t f = 0; f < index.flow_count(); ++f) {
    if (x[f] == 0.0) continue;
    const ShapeView v = index.shape(f);
    memo.begin(v.w, x[f]);
    for (std::size_t i = 0; i < v.comps.size(); ++i) st.delta[v.comps[i]] += memo(v.count[i]);
    if (counters) {
      ++counters->flows_visited;
      counters->entries_updated += v.comps.size();
    }
  }
  return st;
}

void update_delta(DeltaState& st, ComponentId l_star, const FlowIndex& index,
                  std::span<const double> x, SearchCounters* counters) {
  if (l_star >= st.in_h.size()) fail(ErrorCode::InvalidArgument, "component out of range");
  if (st.in_h[l_star]) fail(ErrorCode::InvalidArgument, "component already in hypothesis");

  // Scratch reused across flows: num_paths under H and under H + l_star.
  static thread_local std::vector<std::uint32_t> np_old, np_new;
  static thread_local LlMemo memo;
  np_old.resize(index.max_components_per_flow());
  np_new.resize(index.max_components_per_flow());
  memo.reset(index.max_width());

  for (auto f : index.flows_of(l_star)) {
    const ShapeView v = index.shape(f);
    const std::size_t nl = v.comps.size();
    const std::uint32_t ls = v.local(l_star);
    std::fill_n(np_old.begin(), nl, 0);
    std::fill_n(np_new.begin(), nl, 0);
    std::size_t b = 0, added = 0;
    for (std::size_t i = 0; i < v.w; ++i) {
      const auto p = v.path(i);
      bool failed = false, has = false;
      for (auto j : p) {
        if (st.in_h[v.comps[j]]) {
          failed = true;
          break;
        }
        has |= j == ls;
      }
      if (failed) {
        ++b;
        continue;
      }
      for (auto j : p) ++np_old[j];
      if (has) {
        ++added;
      } else {
        for (auto j : p) ++np_new[j];
      }
    }
    if (counters) ++counters->flows_visited;
    if (added == 0 || x[f] == 0.0) continue;
    const std::size_t b2 = b + added;
    memo.begin(v.w, x[f]);
    const double base_old = memo(b), base_new = memo(b2);
    for (std::size_t j = 0; j < nl; ++j) {
      const ComponentId c = v.comps[j];
      if (c == l_star || st.in_h[c]) continue;
      const double d = (memo(b2 + np_new[j]) - base_new) - (memo(b + np_old[j]) - base_old);
      st.delta[c] += d;
      if (counters) ++counters->entries_updated;
    }
  }
  st.in_h[l_star] = 1;
  st.delta[l_star] = kMasked;
  st.h.insert(l_star);
}

ComponentId argmax_delta(const DeltaArray& delta, std::uint64_t* scanned) {
  ComponentId best = kNoComponent;
  long double best_v = kMasked;
  std::uint64_t seen = 0;
  for (std::size_t c = 0; c < delta.size(); ++c) {
    const long double v = delta[c];
    if (v == kMasked) continue;
    ++seen;
    if (best == kNoComponent || clearly_greater(v, best_v)) {
      best = static_cast<ComponentId>(c);
      best_v = v;
    }
  }
  if (scanned) *scanned += seen;
  return best;
}

namespace {

SearchResult greedy_jle(const FlowIndex& index, const SearchSpace& space, const ModelParams& params,
                        std::span<const double> x, const GreedyOptions& opt) {
  SearchResult res;
  const auto start = Clock::now();
  DeltaState st = compute_initial_delta(index, space, params, x, &res.counters);
  long double ll = 0.0L;
  for (std::uint32_t it = 0; it < opt.max_iterations; ++it) {
    std::uint64_t scanned = 0;
    const ComponentId c = argmax_delta(st.delta, &scanned);
    res.counters.hypotheses_scanned += scanned;
    if (c == kNoComponent || !(st.delta[c] > 0.0L)) break;
    const long double d = st.delta[c];
    ll += d;
    const auto before = res.counters.flows_visited;
    update_delta(st, c, index, x, &res.counters);
    res.order.push_back(c);
    res.iterations.push_back({it, c, static_cast<double>(d), static_cast<double>(ll), micros_since(start),
                              scanned, res.counters.flows_visited - before});
  }
  res.hypothesis = st.h;
  res.log_likelihood = static_cast<double>(ll);
  return res;
}

// Reference search without joint exploration: LL(H + c) is evaluated over
// every flow for every candidate, O(n m) per iteration.
SearchResult greedy_naive(const FlowIndex& index, const SearchSpace& space, const ModelParams& params,
                          std::span<const double> x, const GreedyOptions& opt) {
  SearchResult res;
  const auto start = Clock::now();
  const std::size_t n = space.component_count();
  std::vector<std::uint8_t> in_h(n, 0);
  std::vector<double> current(index.flow_count(), 0.0);
  DeltaArray delta(n, kMasked);
  long double ll = 0.0L;

  auto failed_count = [&](const ShapeView& v, std::uint32_t extra) {
    std::size_t b = 0;
    for (std::size_t i = 0; i < v.w; ++i) {
      for (auto j : v.path(i)) {
        if (j == extra || in_h[v.comps[j]]) {
          ++b;
          break;
        }
      }
    }
    return b;
  };

  for (std::uint32_t it = 0; it < opt.max_iterations; ++it) {
    const auto none = static_cast<std::uint32_t>(-1);
    for (std::size_t f = 0; f < index.flow_count(); ++f) {
      const ShapeView v = index.shape(f);
      current[f] = flow_ll(v.w, failed_count(v, none), x[f]);
    }
    for (std::size_t c = 0; c < n; ++c) {
      if (!space.candidate[c] || in_h[c]) {
        delta[c] = kMasked;
        continue;
      }
      long double v_c = space.prior(static_cast<ComponentId>(c), params);
      for (std::size_t f = 0; f < index.flow_count(); ++f) {
        const ShapeView v = index.shape(f);
        const double with = flow_ll(v.w, failed_count(v, v.local(static_cast<ComponentId>(c))), x[f]);
        v_c += with - current[f];
        ++res.counters.flows_visited;
      }
      delta[c] = v_c;
    }
    std::uint64_t scanned = 0;
    const ComponentId c = argmax_delta(delta, &scanned);
    res.counters.hypotheses_scanned += scanned;
    if (c == kNoComponent || !(delta[c] > 0.0L)) break;
    ll += delta[c];
    in_h[c] = 1;
    res.hypothesis.insert(c);
    res.order.push_back(c);
    res.iterations.push_back({it, c, static_cast<double>(delta[c]), static_cast<double>(ll),
                              micros_since(start), scanned, 0});
  }
  res.log_likelihood = static_cast<double>(ll);
  return res;
}

}  // namespace

SearchResult greedy_search(const FlowIndex& index, const SearchSpace& space, const ModelParams& params,
                           std::span<const double> x, const GreedyOptions& options) {
  if (x.size() != index.flow_count()) fail(ErrorCode::InvalidArgument, "log ratio count mismatch");
  if (space.component_count() != index.component_count()) {
    fail(ErrorCode::InvalidArgument, "search space does not match the flow index");
  }
  return options.use_jle ? greedy_jle(index, space, params, x, options)
                         : greedy_naive(index, space, params, x, options);
}

SearchResult greedy_search(const FlowIndex& index, const SearchSpace& space, const ModelParams& params,
                           const GreedyOptions& options) {
  const auto x = log_ratios(index, params);
  return greedy_search(index, space, params, x, options);
}

void write_iterations_csv(std::ostream& out, const SearchResult& result) {
  out << "# schema-version 1\n";
  out << "iteration,component_id,delta,cumulative_ll,elapsed_us,hypotheses_scanned\n";
  for (const auto& r : result.iterations) {
    out << r.iteration << ',' << r.component << ',' << format_double(r.delta) << ','
        << format_double(r.cumulative_ll) << ',' << r.elapsed_us << ',' << r.hypotheses_scanned << '\n';
  }
}

}  // namespace flock
