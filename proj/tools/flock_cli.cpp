// Command line front end. Talks to the library only through the C interface.

#include <glob.h>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "flock/flock.h"

namespace {

// Data errors (bad files, infeasible requests) exit 2; usage errors exit 1.
struct DataError {
  std::string message;
};

void check(flock_status s) {
  if (s != FLOCK_OK) throw DataError{std::string(flock_status_name(s)) + ": " + flock_last_error()};
}

template <class T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using Topo = std::unique_ptr<flock_topology, Deleter<flock_topology, flock_topology_free>>;
using Params = std::unique_ptr<flock_params, Deleter<flock_params, flock_params_free>>;
using Scenario = std::unique_ptr<flock_scenario, Deleter<flock_scenario, flock_scenario_free>>;
using TraceH = std::unique_ptr<flock_trace, Deleter<flock_trace, flock_trace_free>>;
using Hyp = std::unique_ptr<flock_hypothesis, Deleter<flock_hypothesis, flock_hypothesis_free>>;
using Inference = std::unique_ptr<flock_inference, Deleter<flock_inference, flock_inference_free>>;
using Calibration = std::unique_ptr<flock_calibration, Deleter<flock_calibration, flock_calibration_free>>;

std::string take(char* s) {
  std::string out(s);
  flock_string_free(s);
  return out;
}

Topo load_topo(const std::string& path) {
  flock_topology* t = nullptr;
  check(flock_topology_load(path.c_str(), &t));
  return Topo(t);
}

TraceH load_trace(const std::string& path, const flock_topology* topo) {
  flock_trace* t = nullptr;
  check(flock_trace_load(path.c_str(), topo, &t));
  return TraceH(t);
}

Params load_params(const std::string& path) {
  flock_params* p = nullptr;
  check(path.empty() ? flock_params_default(&p) : flock_params_load(path.c_str(), &p));
  return Params(p);
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  out << text;
  if (!out) throw DataError{"cannot write " + path};
}

std::vector<std::string> expand(const std::vector<std::string>& patterns) {
  std::vector<std::string> files;
  for (const auto& p : patterns) {
    glob_t g{};
    const int rc = ::glob(p.c_str(), 0, nullptr, &g);
    if (rc == 0) {
      for (std::size_t i = 0; i < g.gl_pathc; ++i) files.emplace_back(g.gl_pathv[i]);
    }
    globfree(&g);
    if (rc == GLOB_NOMATCH) throw DataError{"no training traces match '" + p + "'"};
    if (rc != 0) throw DataError{"cannot expand '" + p + "'"};
  }
  return files;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Failure localization for datacenter networks"};
  app.require_subcommand(1);
  std::uint64_t seed = 1;
  app.add_option("--seed", seed, "Random seed")->capture_default_str();
  auto seeded = [&](CLI::App* sub) { sub->add_option("--seed", seed, "Random seed"); };

  // topo gen
  auto* topo = app.add_subcommand("topo", "Topology tools");
  topo->require_subcommand(1);
  auto* gen = topo->add_subcommand("gen", "Generate a topology file");
  std::string topo_type = "fat-tree", topo_out;
  int k = 4, hosts_per_tor = 1, spines = 2, leaves = 4;
  double omit = 0.0;
  gen->add_option("--type", topo_type, "fat-tree or two-tier")
      ->check(CLI::IsMember({"fat-tree", "two-tier"}))
      ->capture_default_str();
  gen->add_option("--k", k, "Fat-tree arity")->capture_default_str();
  gen->add_option("--hosts-per-tor", hosts_per_tor, "Hosts under each ToR")->capture_default_str();
  gen->add_option("--spines", spines, "Two-tier spine count")->capture_default_str();
  gen->add_option("--leaves", leaves, "Two-tier leaf count")->capture_default_str();
  gen->add_option("--omit", omit, "Fraction of inter-switch links to remove")->capture_default_str();
  gen->add_option("--out", topo_out, "Output topology file")->required();
  seeded(gen);

  // sim run
  auto* sim = app.add_subcommand("sim", "Simulation");
  sim->require_subcommand(1);
  auto* run = sim->add_subcommand("run", "Simulate a labeled trace");
  std::string sim_topo, scenario_path, pattern = "uniform", trace_out, sim_kind = "silent";
  std::uint64_t flows = 10000, probes = 0;
  int random_failures = 0;
  double min_rate = 0.001, max_rate = 0.01, device_fraction = 1.0, noise = 1e-4;
  double hot_racks = 0.05, hot_traffic = 0.5;
  bool rtt = false;
  run->add_option("--topo", sim_topo, "Topology file")->required();
  run->add_option("--scenario", scenario_path, "Failure scenario file");
  run->add_option("--random-failures", random_failures, "Random failures when no scenario file is given");
  run->add_option("--failure-kind", sim_kind, "silent or device")->check(CLI::IsMember({"silent", "device"}));
  run->add_option("--min-rate", min_rate, "Lowest random drop rate")->capture_default_str();
  run->add_option("--max-rate", max_rate, "Highest random drop rate")->capture_default_str();
  run->add_option("--device-link-fraction", device_fraction, "Share of a failed device's links that drop")
      ->capture_default_str();
  run->add_option("--pattern", pattern, "uniform or skewed")
      ->check(CLI::IsMember({"uniform", "skewed"}))
      ->capture_default_str();
  run->add_option("--hot-racks", hot_racks, "Fraction of racks that are hot")->capture_default_str();
  run->add_option("--hot-traffic", hot_traffic, "Fraction of flows between hot hosts")->capture_default_str();
  run->add_option("--flows", flows, "Application flows")->capture_default_str();
  run->add_option("--probes", probes, "Probe packets per host")->capture_default_str();
  run->add_option("--noise", noise, "Largest drop rate of a healthy link")->capture_default_str();
  run->add_flag("--rtt", rtt, "Record RTTs on application flows");
  run->add_option("--out", trace_out, "Output trace file")->required();
  run->get_option("--scenario")->excludes(run->get_option("--random-failures"));
  seeded(run);

  // infer
  auto* infer = app.add_subcommand("infer", "Localize failed components");
  std::string inf_trace, inf_topo, inf_kind = "INT", inf_scheme = "flock", inf_params, hyp_out, iterations_out;
  bool no_jle = false, no_devices = false, per_flow = false, no_reduce = false;
  double budget = 1e8;
  infer->add_option("--trace", inf_trace, "Trace file")->required();
  infer->add_option("--topo", inf_topo, "Topology file")->required();
  infer->add_option("--kind", inf_kind, "Input kind: A1, A2, P, INT, A1+P, A2+P, A1+A2+P")->capture_default_str();
  infer->add_option("--scheme", inf_scheme, "flock, vote007 or sherlock")
      ->check(CLI::IsMember({"flock", "vote007", "sherlock"}))
      ->capture_default_str();
  infer->add_option("--params", inf_params, "Parameter file (defaults when omitted)");
  infer->add_option("--out", hyp_out, "Output hypothesis file")->required();
  infer->add_option("--iterations", iterations_out, "Per-iteration CSV of the greedy search");
  infer->add_flag("--no-jle", no_jle, "Evaluate each candidate from scratch");
  infer->add_flag("--no-devices", no_devices, "Only consider links");
  infer->add_flag("--per-flow", per_flow, "Use the RTT threshold indicator per flow");
  infer->add_flag("--no-reduce", no_reduce, "Do not collapse links into equivalence classes for P input");
  infer->add_option("--sherlock-budget", budget, "Largest Sherlock scan allowed")->capture_default_str();
  seeded(infer);

  // calibrate
  auto* cal = app.add_subcommand("calibrate", "Grid-search parameters on labeled traces");
  std::string cal_topo, cal_scheme = "flock", cal_kind = "INT", cal_out, frontier_out, cal_base;
  std::vector<std::string> train;
  cal->add_option("--topo", cal_topo, "Topology file")->required();
  cal->add_option("--train", train, "Training trace files or glob patterns")->required();
  cal->add_option("--scheme", cal_scheme, "flock, vote007 or sherlock")
      ->check(CLI::IsMember({"flock", "vote007", "sherlock"}))
      ->capture_default_str();
  cal->add_option("--kind", cal_kind, "Input kind")->capture_default_str();
  cal->add_option("--base", cal_base, "Parameter file for the values not searched");
  cal->add_option("--out", cal_out, "Output parameter file")->required();
  cal->add_option("--frontier", frontier_out, "Frontier CSV (stdout when omitted)");
  seeded(cal);

  // eval
  auto* eval = app.add_subcommand("eval", "Score a hypothesis against a trace's ground truth");
  std::string ev_pred, ev_trace, ev_topo;
  bool classes = false;
  eval->add_option("--pred", ev_pred, "Hypothesis file")->required();
  eval->add_option("--trace", ev_trace, "Labeled trace file")->required();
  eval->add_option("--topo", ev_topo, "Topology file")->required();
  eval->add_flag("--classes", classes, "Add equivalence-class precision and recall");
  seeded(eval);

  // bench
  auto* bench = app.add_subcommand("bench", "Time the inference schemes on one trace");
  std::string b_trace, b_topo, b_kind = "INT", b_params, b_schemes, b_out;
  int runs = 3;
  bench->add_option("--trace", b_trace, "Trace file")->required();
  bench->add_option("--topo", b_topo, "Topology file")->required();
  bench->add_option("--kind", b_kind, "Input kind")->capture_default_str();
  bench->add_option("--params", b_params, "Parameter file");
  bench->add_option("--schemes", b_schemes, "Comma separated: greedy+jle,greedy,sherlock+jle,sherlock,vote007");
  bench->add_option("--runs", runs, "Timed runs per scheme")->capture_default_str();
  bench->add_option("--out", b_out, "Output CSV (stdout when omitted)");
  seeded(bench);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*gen) {
      flock_topology* t = nullptr;
      check(topo_type == "fat-tree" ? flock_topology_fat_tree(k, hosts_per_tor, &t)
                                    : flock_topology_two_tier(spines, leaves, hosts_per_tor, &t));
      Topo out(t);
      if (omit > 0.0) {
        flock_topology* cut = nullptr;
        check(flock_topology_omit_links(out.get(), omit, seed, &cut));
        out.reset(cut);
      }
      check(flock_topology_save(out.get(), topo_out.c_str()));
      std::cerr << "wrote " << topo_out << ": " << flock_topology_device_count(out.get()) << " devices, "
                << flock_topology_link_count(out.get()) << " links\n";
    } else if (*run) {
      auto t = load_topo(sim_topo);
      flock_scenario* s = nullptr;
      if (!scenario_path.empty()) {
        check(flock_scenario_load(scenario_path.c_str(), &s));
      } else if (random_failures > 0) {
        check(flock_scenario_random(sim_kind.c_str(), random_failures, min_rate, max_rate, device_fraction, &s));
      }
      Scenario sc(s);
      flock_sim_config cfg;
      flock_sim_config_default(&cfg);
      cfg.app_flows = flows;
      cfg.probes_per_host = probes;
      cfg.noise_drop_max = noise;
      cfg.seed = seed;
      cfg.emit_rtt = rtt ? 1 : 0;
      cfg.skewed = pattern == "skewed" ? 1 : 0;
      cfg.hot_rack_fraction = hot_racks;
      cfg.hot_traffic_fraction = hot_traffic;
      flock_trace* tr = nullptr;
      check(flock_simulate(t.get(), sc.get(), &cfg, &tr));
      TraceH trace(tr);
      check(flock_trace_save(trace.get(), trace_out.c_str()));
      std::cerr << "wrote " << trace_out << ": " << flock_trace_record_count(trace.get()) << " records, "
                << flock_trace_failure_count(trace.get()) << " failed components\n";
    } else if (*infer) {
      auto t = load_topo(inf_topo);
      auto tr = load_trace(inf_trace, t.get());
      auto p = load_params(inf_params);
      flock_infer_options o;
      flock_infer_options_default(&o);
      o.use_jle = no_jle ? 0 : 1;
      o.include_devices = no_devices ? 0 : 1;
      o.per_flow = per_flow ? 1 : 0;
      o.reduce_passive = no_reduce ? 0 : 1;
      o.sherlock_budget = budget;
      flock_inference* inf = nullptr;
      check(flock_infer(t.get(), tr.get(), inf_kind.c_str(), inf_scheme.c_str(), p.get(), &o, &inf));
      Inference result(inf);
      flock_hypothesis* h = nullptr;
      check(flock_inference_hypothesis(result.get(), &h));
      Hyp hyp(h);
      check(flock_hypothesis_save(hyp.get(), hyp_out.c_str()));
      if (!iterations_out.empty()) {
        char* csv = nullptr;
        check(flock_inference_iterations_csv(result.get(), &csv));
        write_text(iterations_out, take(csv));
      }
      std::cerr << "wrote " << hyp_out << ": " << flock_hypothesis_size(hyp.get()) << " components"
                << (flock_inference_class_level(result.get()) ? " (equivalence classes)" : "") << ", "
                << flock_inference_hypotheses_scanned(result.get()) << " hypotheses scanned\n";
    } else if (*cal) {
      auto t = load_topo(cal_topo);
      const auto files = expand(train);
      std::vector<TraceH> owned;
      std::vector<const flock_trace*> traces;
      for (const auto& f : files) {
        owned.push_back(load_trace(f, t.get()));
        traces.push_back(owned.back().get());
      }
      auto base = load_params(cal_base);
      flock_calibration* c = nullptr;
      check(flock_calibrate(t.get(), traces.data(), traces.size(), cal_scheme.c_str(), cal_kind.c_str(), base.get(),
                            &c));
      Calibration result(c);
      flock_params* chosen = nullptr;
      double bar = 0.0;
      int fallback = 0;
      check(flock_calibration_choice(result.get(), &chosen, &bar, &fallback));
      Params p(chosen);
      check(flock_params_save(p.get(), cal_out.c_str()));
      char* csv = nullptr;
      check(flock_calibration_frontier_csv(result.get(), &csv));
      write_text(frontier_out, take(csv));
      if (fallback) std::cerr << "warning: no frontier point reached the minimum recall; using the max-recall point\n";
      std::cerr << "wrote " << cal_out << " from " << traces.size() << " traces, "
                << flock_calibration_frontier_size(result.get()) << " frontier points, precision bar " << bar << "\n";
    } else if (*eval) {
      auto t = load_topo(ev_topo);
      auto tr = load_trace(ev_trace, t.get());
      flock_hypothesis* h = nullptr;
      check(flock_hypothesis_load(ev_pred.c_str(), t.get(), &h));
      Hyp hyp(h);
      flock_eval_result r;
      check(flock_score(t.get(), hyp.get(), tr.get(), classes ? 1 : 0, &r));
      std::cout << "# schema-version 1\n";
      std::cout << "precision,recall,fscore,predicted,correct";
      if (r.has_classes) std::cout << ",class_precision,class_recall,precision_bound";
      std::cout << '\n' << r.precision << ',' << r.recall << ',' << r.fscore << ',' << r.predicted << ','
                << r.correct;
      if (r.has_classes) std::cout << ',' << r.class_precision << ',' << r.class_recall << ',' << r.precision_bound;
      std::cout << '\n';
    } else if (*bench) {
      auto t = load_topo(b_topo);
      auto tr = load_trace(b_trace, t.get());
      auto p = load_params(b_params);
      char* csv = nullptr;
      check(flock_bench(t.get(), tr.get(), b_kind.c_str(), p.get(), b_schemes.empty() ? nullptr : b_schemes.c_str(),
                        runs, &csv));
      write_text(b_out, take(csv));
    }
  } catch (const DataError& e) {
    std::cerr << "error: " << e.message << '\n';
    return 2;
  }
  return 0;
}
