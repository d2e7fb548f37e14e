#include "flock/inference.hpp"

namespace flock {

const char* to_string(Scheme s) {
  switch (s) {
    case Scheme::Flock: return "flock";
    case Scheme::Vote007: return "vote007";
    case Scheme::Sherlock: return "sherlock";
  }
  return "?";
}

Scheme parse_scheme(const std::string& text) {
  for (auto s : {Scheme::Flock, Scheme::Vote007, Scheme::Sherlock}) {
    if (text == to_string(s)) return s;
  }
  fail(ErrorCode::InvalidArgument, "unknown scheme '" + text + "'");
}

Problem prepare(std::span<const FlowRecord> records, const Topology& topo, const Router& router,
                InputKind kind, const ModelParams& params, const InferOptions& options,
                std::shared_ptr<const ReducedTopology> reduced) {
  Problem pb;
  pb.kind = kind;
  if (options.per_flow) {
    const auto binary = per_flow_binarize(records, params.rtt_threshold_ms);
    pb.flows = select_input(binary, kind, router);
  } else {
    pb.flows = select_input(records, kind, router);
  }
  if (kind == InputKind::P && options.reduce_passive) {
    if (!reduced) reduced = std::make_shared<const ReducedTopology>(reduced_topology(topo));
    if (reduced->nontrivial()) pb.reduced = std::move(reduced);
  }
  pb.space = pb.reduced ? restricted_search_space(topo, pb.reduced->representative)
                        : full_search_space(topo, options.include_devices);
  pb.index = std::make_unique<FlowIndex>(pb.flows, pb.space);
  return pb;
}

InferResult solve(const Problem& pb, const Topology& topo, Scheme scheme, const ModelParams& params,
                  std::span<const double> x, const InferOptions& options) {
  InferResult out;
  switch (scheme) {
    case Scheme::Flock: {
      GreedyOptions g;
      g.use_jle = options.use_jle;
      out.search = greedy_search(*pb.index, pb.space, params, x, g);
      out.hypothesis = out.search.hypothesis;
      out.hypotheses_scanned = out.search.counters.hypotheses_scanned;
      break;
    }
    case Scheme::Sherlock: {
      SherlockOptions s;
      s.max_failures = params.max_failures;
      s.use_jle = options.use_jle;
      s.budget = options.sherlock_budget;
      auto r = sherlock_search(*pb.index, pb.space, params, x, s);
      out.hypothesis = r.hypothesis;
      out.hypotheses_scanned = r.hypotheses_scanned;
      break;
    }
    case Scheme::Vote007:
      if (uses_passive_paths(pb.kind)) {
        fail(ErrorCode::NoUsableInput, "vote007 needs explicit paths; use A1, A2 or INT input");
      }
      out.hypothesis = vote007(pb.flows, topo, params.vote_threshold);
      break;
  }
  if (pb.reduced) {
    out.class_level = true;
    std::vector<ComponentId> members;
    for (auto rep : out.hypothesis) {
      const auto cls = pb.reduced->class_of.at(rep);
      out.classes.push_back(cls);
      const auto& m = pb.reduced->classes[cls].members;
      members.insert(members.end(), m.begin(), m.end());
    }
    out.hypothesis = Hypothesis(std::move(members));
  }
  return out;
}

InferResult solve(const Problem& pb, const Topology& topo, Scheme scheme, const ModelParams& params,
                  const InferOptions& options) {
  const auto x = log_ratios(*pb.index, params);
  return solve(pb, topo, scheme, params, x, options);
}

InferResult infer(std::span<const FlowRecord> records, const Topology& topo, InputKind kind,
                  const ModelParams& params, const InferOptions& options, Scheme scheme) {
  params.validate();
  Router router(topo);
  const Problem pb = prepare(records, topo, router, kind, params, options);
  return solve(pb, topo, scheme, params, options);
}

}  // namespace flock
