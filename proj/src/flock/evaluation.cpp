#include "flock/evaluation.hpp"

#include <algorithm>
#include <chrono>
#include <map>
#include <ostream>
#include <set>

namespace flock {

double fscore(double p, double r) { return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0; }

EvalReport score(const Hypothesis& predicted, const GroundTruth& truth, const Topology& topo,
                 const ReducedTopology* classes) {
  for (auto c : predicted) {
    if (!topo.exists(c)) fail(ErrorCode::InvalidArgument, "predicted component " + std::to_string(c) + " not in topology");
  }
  std::set<ComponentId> failed_links;
  std::set<ComponentId> standalone;
  std::map<ComponentId, std::vector<ComponentId>> by_device;
  for (const auto& f : truth.failures) {
    if (!topo.exists(f.id)) fail(ErrorCode::InvalidArgument, "ground truth component " + std::to_string(f.id) + " not in topology");
    if (f.parent != kNoComponent) {
      by_device[f.parent].push_back(f.id);
      failed_links.insert(f.id);
    } else if (topo.is_device(f.id)) {
      by_device[f.id];
    } else {
      standalone.insert(f.id);
      failed_links.insert(f.id);
    }
  }

  EvalReport rep;
  rep.predicted = predicted.size();
  for (auto c : predicted) {
    bool ok = failed_links.count(c) > 0 || by_device.count(c) > 0;
    if (!ok && topo.is_link(c)) {
      const auto& l = topo.link(c);
      ok = by_device.count(l.a) > 0 || by_device.count(l.b) > 0;
    }
    rep.correct += ok ? 1 : 0;
  }
  rep.failure_units = standalone.size() + by_device.size();
  for (auto l : standalone) rep.recalled += predicted.contains(l) ? 1.0 : 0.0;
  for (const auto& [d, links] : by_device) {
    if (predicted.contains(d) || links.empty()) {
      rep.recalled += predicted.contains(d) ? 1.0 : 0.0;
      continue;
    }
    std::size_t hit = 0;
    for (auto l : links) hit += predicted.contains(l) ? 1 : 0;
    rep.recalled += static_cast<double>(hit) / static_cast<double>(links.size());
  }
  rep.precision = rep.predicted == 0 ? 1.0 : static_cast<double>(rep.correct) / static_cast<double>(rep.predicted);
  rep.recall = rep.failure_units == 0 ? 1.0 : rep.recalled / static_cast<double>(rep.failure_units);
  rep.fscore = fscore(rep.precision, rep.recall);

  if (classes) {
    rep.has_classes = true;
    auto cls = [&](ComponentId l) -> std::optional<std::uint32_t> {
      auto it = classes->class_of.find(l);
      if (it == classes->class_of.end()) return std::nullopt;
      return it->second;
    };
    std::set<std::uint32_t> truth_classes, pred_classes;
    for (auto l : failed_links) {
      if (auto c = cls(l)) truth_classes.insert(*c);
    }
    for (auto l : predicted) {
      if (auto c = cls(l)) pred_classes.insert(*c);
    }
    std::size_t good = 0;
    for (auto c : pred_classes) good += truth_classes.count(c);
    rep.class_precision = pred_classes.empty() ? 1.0 : static_cast<double>(good) / static_cast<double>(pred_classes.size());
    std::size_t found = 0;
    for (auto l : failed_links) {
      auto c = cls(l);
      found += (c && pred_classes.count(*c)) ? 1 : 0;
    }
    rep.class_recall = failed_links.empty() ? 1.0 : static_cast<double>(found) / static_cast<double>(failed_links.size());
    std::size_t span = 0;
    for (auto c : truth_classes) span += classes->classes[c].members.size();
    rep.precision_bound = span == 0 ? 1.0 : static_cast<double>(failed_links.size()) / static_cast<double>(span);
  }
  return rep;
}

AggregateReport aggregate(std::span<const EvalReport> reports) {
  AggregateReport a;
  a.traces = reports.size();
  if (reports.empty()) return a;
  double p = 0, r = 0, f = 0, cp = 0, cr = 0, pb = 0;
  for (const auto& e : reports) {
    p += e.precision;
    r += e.recall;
    f += e.fscore;
    cp += e.class_precision;
    cr += e.class_recall;
    pb += e.precision_bound;
  }
  const double n = static_cast<double>(reports.size());
  a.mean_precision = p / n;
  a.mean_recall = r / n;
  a.mean_fscore = f / n;
  a.fscore_of_means = fscore(a.mean_precision, a.mean_recall);
  a.mean_class_precision = cp / n;
  a.mean_class_recall = cr / n;
  a.mean_precision_bound = pb / n;
  return a;
}

void write_eval_csv(std::ostream& out, std::span<const EvalReport> reports, const AggregateReport& total) {
  out << "# schema-version 1\n";
  out << "trace,precision,recall,fscore,predicted,correct,class_precision,class_recall,precision_bound\n";
  auto row = [&](const std::string& name, double p, double r, double f, std::size_t pred, std::size_t ok,
                 double cp, double cr, double pb) {
    out << name << ',' << format_double(p) << ',' << format_double(r) << ',' << format_double(f) << ',' << pred
        << ',' << ok << ',' << format_double(cp) << ',' << format_double(cr) << ',' << format_double(pb) << '\n';
  };
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const auto& e = reports[i];
    row(std::to_string(i), e.precision, e.recall, e.fscore, e.predicted, e.correct, e.class_precision,
        e.class_recall, e.precision_bound);
  }
  if (reports.size() > 1) {
    std::size_t pred = 0, ok = 0;
    for (const auto& e : reports) {
      pred += e.predicted;
      ok += e.correct;
    }
    row("mean", total.mean_precision, total.mean_recall, total.mean_fscore, pred, ok, total.mean_class_precision,
        total.mean_class_recall, total.mean_precision_bound);
  }
}

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

BenchReport bench(std::span<const FlowRecord> records, const Topology& topo, InputKind kind,
                  const ModelParams& params, const BenchOptions& opt) {
  params.validate();
  if (opt.runs < 1) fail(ErrorCode::InvalidArgument, "bench needs at least one run");
  Router router(topo);
  const Problem pb = prepare(records, topo, router, kind, params);
  const auto x = log_ratios(*pb.index, params);
  BenchReport rep;
  rep.n = pb.space.candidate_count();
  rep.m = pb.index->flow_count();
  rep.T = pb.index->max_components_per_flow();
  rep.D = pb.index->max_flows_per_component();

  for (const auto& name : opt.schemes) {
    BenchEntry e;
    e.scheme = name;
    e.kind = kind;
    std::vector<double> times;
    if (name == "greedy+jle" || name == "greedy") {
      GreedyOptions g;
      g.use_jle = name == "greedy+jle";
      SearchResult r;
      for (int i = 0; i <= opt.runs; ++i) {
        const auto t0 = Clock::now();
        r = greedy_search(*pb.index, pb.space, params, x, g);
        if (i > 0) times.push_back(ms_since(t0));
      }
      e.hypotheses_scanned = r.counters.hypotheses_scanned;
      e.hypothesis = r.hypothesis;
      if (g.use_jle) rep.iterations = r.iterations;
    } else if (name == "sherlock+jle" || name == "sherlock") {
      SherlockOptions s;
      s.max_failures = params.max_failures;
      s.use_jle = name == "sherlock+jle";
      s.budget = opt.sherlock_budget;
      const std::uint64_t estimate = sherlock_scan_count(rep.n, s.max_failures);
      if (static_cast<double>(estimate) > opt.sherlock_budget) {
        s.scan_limit = std::max<std::uint64_t>(opt.sherlock_sample, 1);
        e.estimated = true;
      }
      SherlockResult r;
      for (int i = 0; i <= opt.runs; ++i) {
        const auto t0 = Clock::now();
        r = sherlock_search(*pb.index, pb.space, params, x, s);
        if (i > 0) times.push_back(ms_since(t0));
      }
      if (e.estimated) {
        const double scale = static_cast<double>(estimate) / static_cast<double>(r.hypotheses_scanned);
        for (auto& t : times) t *= scale;
        e.hypotheses_scanned = estimate;
      } else {
        e.hypotheses_scanned = r.hypotheses_scanned;
        e.hypothesis = r.hypothesis;
      }
    } else if (name == "vote007") {
      if (uses_passive_paths(kind)) continue;
      for (int i = 0; i <= opt.runs; ++i) {
        const auto t0 = Clock::now();
        e.hypothesis = vote007(pb.flows, topo, params.vote_threshold);
        if (i > 0) times.push_back(ms_since(t0));
      }
    } else {
      fail(ErrorCode::InvalidArgument, "unknown bench scheme '" + name + "'");
    }
    e.runs = times.size();
    e.median_ms = median(times);
    rep.entries.push_back(std::move(e));
  }
  return rep;
}

void write_bench_csv(std::ostream& out, const BenchReport& r) {
  out << "# schema-version 1\n";
  out << "scheme,kind,n,m,T,D,threads,median_ms,runs,hypotheses_scanned,status\n";
  for (const auto& e : r.entries) {
    out << e.scheme << ',' << to_string(e.kind) << ',' << r.n << ',' << r.m << ',' << r.T << ',' << r.D << ','
        << r.threads << ',' << format_double(e.median_ms) << ',' << e.runs << ',' << e.hypotheses_scanned << ','
        << (e.estimated ? "estimated-not-run" : "run") << '\n';
  }
}

}  // namespace flock
