#include "flock/baselines.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace flock {

std::uint64_t sherlock_scan_count(std::uint64_t n, int k) {
  unsigned __int128 total = 0, term = 1;  // term = C(n, i)
  const unsigned __int128 cap = std::numeric_limits<std::uint64_t>::max();
  for (int i = 0; i <= k && static_cast<std::uint64_t>(i) <= n; ++i) {
    if (i > 0) {
      term = term * (n - static_cast<std::uint64_t>(i) + 1) / static_cast<std::uint64_t>(i);
      if (term > cap) return std::numeric_limits<std::uint64_t>::max();
    }
    total += term;
    if (total > cap) return std::numeric_limits<std::uint64_t>::max();
  }
  return static_cast<std::uint64_t>(total);
}

namespace {

struct SherlockRun {
  const FlowIndex& index;
  const SearchSpace& space;
  const ModelParams& params;
  std::span<const double> x;
  const SherlockOptions& opt;
  std::vector<ComponentId> cand;

  SherlockResult res;
  std::vector<ComponentId> current;
  bool stop = false;

  // Naive evaluation scratch.
  std::vector<std::uint8_t> in_h;
  std::vector<std::uint32_t> stamp;
  std::uint32_t gen = 0;

  void consider(long double ll) {
    ++res.hypotheses_scanned;
    if (clearly_greater(ll, res.log_likelihood)) {
      res.log_likelihood = static_cast<double>(ll);
      res.hypothesis = Hypothesis(current);
    }
    if (opt.scan_limit != 0 && res.hypotheses_scanned >= opt.scan_limit) {
      stop = true;
      res.truncated = true;
    }
  }

  void jle(std::size_t first, long double ll, const DeltaState& st) {
    for (std::size_t i = first; i < cand.size() && !stop; ++i) {
      const ComponentId c = cand[i];
      const long double child = ll + st.delta[c];
      current.push_back(c);
      consider(child);
      if (!stop && static_cast<int>(current.size()) < opt.max_failures && i + 1 < cand.size()) {
        DeltaState next = st;
        update_delta(next, c, index, x);
        jle(i + 1, child, next);
      }
      current.pop_back();
    }
  }

  long double evaluate() {
    long double ll = 0.0L;
    for (auto c : current) ll += space.prior(c, params);
    if (++gen == 0) {
      std::fill(stamp.begin(), stamp.end(), 0);
      gen = 1;
    }
    for (auto c : current) {
      for (auto f : index.flows_of(c)) {
        if (stamp[f] == gen) continue;
        stamp[f] = gen;
        const ShapeView v = index.shape(f);
        std::size_t b = 0;
        for (std::size_t i = 0; i < v.w; ++i) {
          for (auto j : v.path(i)) {
            if (in_h[v.comps[j]]) {
              ++b;
              break;
            }
          }
        }
        ll += flow_ll(v.w, b, x[f]);
      }
    }
    return ll;
  }

  void naive(std::size_t first) {
    for (std::size_t i = first; i < cand.size() && !stop; ++i) {
      const ComponentId c = cand[i];
      current.push_back(c);
      in_h[c] = 1;
      consider(evaluate());
      if (!stop && static_cast<int>(current.size()) < opt.max_failures) naive(i + 1);
      in_h[c] = 0;
      current.pop_back();
    }
  }
};

}  // namespace

SherlockResult sherlock_search(const FlowIndex& index, const SearchSpace& space, const ModelParams& params,
                               std::span<const double> x, const SherlockOptions& opt) {
  if (opt.max_failures < 1) fail(ErrorCode::InvalidArgument, "K must be >= 1");
  if (x.size() != index.flow_count()) fail(ErrorCode::InvalidArgument, "log ratio count mismatch");
  SherlockRun run{index, space, params, x, opt, {}, {}, {}, false, {}, {}, 0};
  for (std::size_t c = 0; c < space.component_count(); ++c) {
    if (space.candidate[c]) run.cand.push_back(static_cast<ComponentId>(c));
  }
  const std::uint64_t estimate = sherlock_scan_count(run.cand.size(), opt.max_failures);
  if (opt.scan_limit == 0 && static_cast<double>(estimate) > opt.budget) {
    fail(ErrorCode::BudgetExceeded, "sherlock would scan an estimated " + std::to_string(estimate) +
                                        " hypotheses, above the budget of " + format_double(opt.budget));
  }
  run.res.log_likelihood = 0.0;
  run.consider(0.0L);  // the empty hypothesis
  if (opt.use_jle) {
    const DeltaState st = compute_initial_delta(index, space, params, x);
    if (!run.stop) run.jle(0, 0.0L, st);
  } else {
    run.in_h.assign(space.component_count(), 0);
    run.stamp.assign(index.flow_count(), 0);
    if (!run.stop) run.naive(0);
  }
  return run.res;
}

SherlockResult sherlock_search(const FlowIndex& index, const SearchSpace& space, const ModelParams& params,
                               const SherlockOptions& options) {
  const auto x = log_ratios(index, params);
  return sherlock_search(index, space, params, x, options);
}

VoteTable vote_scores(std::span<const SelectedFlow> flows, const Topology& topo) {
  VoteTable t;
  t.score.assign(topo.component_count(), 0.0);
  for (const auto& f : flows) {
    if (!f.paths || f.paths->size() != 1) {
      fail(ErrorCode::InvalidArgument, "vote007 needs every flow to carry its explicit path");
    }
    if (f.r == 0) continue;
    const auto p = (*f.paths)[0];
    std::size_t links = 0;
    for (auto c : p) links += topo.is_link(c) ? 1 : 0;
    if (links == 0) continue;
    const double share = 1.0 / static_cast<double>(links);
    for (auto c : p) {
      if (topo.is_link(c)) t.score[c] += share;
    }
  }
  for (double s : t.score) t.max_score = std::max(t.max_score, s);
  return t;
}

Hypothesis vote007(const VoteTable& t, double threshold) {
  std::vector<ComponentId> out;
  if (t.max_score <= 0.0) return {};
  // A relative slack lets equal vote totals summed in different orders tie.
  const double cut = threshold * t.max_score * (1.0 - 1e-12);
  for (std::size_t c = 0; c < t.score.size(); ++c) {
    if (t.score[c] > 0.0 && t.score[c] >= cut) out.push_back(static_cast<ComponentId>(c));
  }
  return Hypothesis(std::move(out));
}

Hypothesis vote007(std::span<const SelectedFlow> flows, const Topology& topo, double threshold) {
  return vote007(vote_scores(flows, topo), threshold);
}

}  // namespace flock
