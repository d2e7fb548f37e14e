#include "flock/flock.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <new>
#include <sstream>
#include <string>

#include "flock/calibration.hpp"
#include "flock/evaluation.hpp"
#include "flock/inference.hpp"
#include "flock/simulator.hpp"

struct flock_topology {
  flock::Topology topo;
};
struct flock_params {
  flock::ModelParams p;
};
struct flock_scenario {
  flock::FailureScenario s;
};
struct flock_trace {
  flock::Trace t;
};
struct flock_hypothesis {
  flock::Hypothesis h;
};
struct flock_inference {
  flock::InferResult r;
};
struct flock_calibration {
  std::vector<flock::ParetoPoint> frontier;
  flock::OperatingPoint choice;
};

namespace {

thread_local std::string last_error;

flock_status to_status(flock::ErrorCode c) {
  switch (c) {
    case flock::ErrorCode::InvalidArgument: return FLOCK_ERR_INVALID_ARGUMENT;
    case flock::ErrorCode::Parse: return FLOCK_ERR_PARSE;
    case flock::ErrorCode::Io: return FLOCK_ERR_IO;
    case flock::ErrorCode::NoUsableInput: return FLOCK_ERR_NO_USABLE_INPUT;
    case flock::ErrorCode::BudgetExceeded: return FLOCK_ERR_BUDGET_EXCEEDED;
    case flock::ErrorCode::Infeasible: return FLOCK_ERR_INFEASIBLE;
    case flock::ErrorCode::Internal: return FLOCK_ERR_INTERNAL;
  }
  return FLOCK_ERR_INTERNAL;
}

template <class F>
flock_status guard(F&& f) {
  try {
    f();
    return FLOCK_OK;
  } catch (const flock::Error& e) {
    last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return FLOCK_ERR_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return FLOCK_ERR_INTERNAL;
  } catch (...) {
    last_error = "unknown error";
    return FLOCK_ERR_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  if (!p) flock::fail(flock::ErrorCode::InvalidArgument, std::string(what) + " is null");
}

char* dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

flock_hypothesis* wrap(flock::Hypothesis h) {
  return new flock_hypothesis{std::move(h)};
}

double* field(flock::ModelParams& p, const std::string& key) {
  if (key == "p_g") return &p.p_g;
  if (key == "p_b") return &p.p_b;
  if (key == "rho_link") return &p.rho_link;
  if (key == "device_prior_log_factor") return &p.device_prior_log_factor;
  if (key == "rtt_threshold_ms") return &p.rtt_threshold_ms;
  if (key == "vote_threshold") return &p.vote_threshold;
  return nullptr;
}

}  // namespace

extern "C" {

const char* flock_version(void) { return "1.0.0"; }

const char* flock_last_error(void) { return last_error.c_str(); }

const char* flock_status_name(flock_status s) {
  switch (s) {
    case FLOCK_OK: return "ok";
    case FLOCK_ERR_INVALID_ARGUMENT: return "invalid argument";
    case FLOCK_ERR_PARSE: return "parse error";
    case FLOCK_ERR_IO: return "i/o error";
    case FLOCK_ERR_NO_USABLE_INPUT: return "no usable input";
    case FLOCK_ERR_BUDGET_EXCEEDED: return "budget exceeded";
    case FLOCK_ERR_INFEASIBLE: return "infeasible";
    case FLOCK_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

void flock_string_free(char* s) { std::free(s); }

// Topology

flock_status flock_topology_fat_tree(int k, int hosts_per_tor, flock_topology** out) {
  return guard([&] {
    need(out, "out");
    *out = new flock_topology{flock::build_fat_tree(k, hosts_per_tor)};
  });
}

flock_status flock_topology_two_tier(int spines, int leaves, int hosts_per_leaf, flock_topology** out) {
  return guard([&] {
    need(out, "out");
    *out = new flock_topology{flock::build_two_tier(spines, leaves, hosts_per_leaf)};
  });
}

flock_status flock_topology_omit_links(const flock_topology* topo, double fraction, uint64_t seed,
                                       flock_topology** out) {
  return guard([&] {
    need(topo, "topology");
    need(out, "out");
    *out = new flock_topology{flock::omit_links(topo->topo, fraction, seed)};
  });
}

flock_status flock_topology_load(const char* path, flock_topology** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    *out = new flock_topology{flock::Topology::load(path)};
  });
}

flock_status flock_topology_parse(const char* text, flock_topology** out) {
  return guard([&] {
    need(text, "text");
    need(out, "out");
    std::istringstream in(text);
    *out = new flock_topology{flock::Topology::parse(in)};
  });
}

flock_status flock_topology_save(const flock_topology* topo, const char* path) {
  return guard([&] {
    need(topo, "topology");
    need(path, "path");
    topo->topo.save(path);
  });
}

flock_status flock_topology_serialize(const flock_topology* topo, char** out) {
  return guard([&] {
    need(topo, "topology");
    need(out, "out");
    *out = dup(topo->topo.serialize());
  });
}

size_t flock_topology_component_count(const flock_topology* topo) {
  return topo ? topo->topo.component_count() : 0;
}
size_t flock_topology_link_count(const flock_topology* topo) { return topo ? topo->topo.links().size() : 0; }
size_t flock_topology_device_count(const flock_topology* topo) { return topo ? topo->topo.devices().size() : 0; }
size_t flock_topology_host_count(const flock_topology* topo) { return topo ? topo->topo.hosts().size() : 0; }
uint64_t flock_topology_checksum(const flock_topology* topo) { return topo ? topo->topo.checksum() : 0; }

flock_status flock_topology_class_count(const flock_topology* topo, size_t* out) {
  return guard([&] {
    need(topo, "topology");
    need(out, "out");
    *out = flock::equivalence_classes(topo->topo).size();
  });
}

void flock_topology_free(flock_topology* topo) { delete topo; }

// Parameters

flock_status flock_params_default(flock_params** out) {
  return guard([&] {
    need(out, "out");
    *out = new flock_params{};
  });
}

flock_status flock_params_load(const char* path, flock_params** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    *out = new flock_params{flock::load_params(path)};
  });
}

flock_status flock_params_parse(const char* text, flock_params** out) {
  return guard([&] {
    need(text, "text");
    need(out, "out");
    std::istringstream in(text);
    *out = new flock_params{flock::parse_params(in)};
  });
}

flock_status flock_params_save(const flock_params* params, const char* path) {
  return guard([&] {
    need(params, "params");
    need(path, "path");
    flock::save_params(path, params->p);
  });
}

flock_status flock_params_set(flock_params* params, const char* key, double value) {
  return guard([&] {
    need(params, "params");
    need(key, "key");
    if (std::string(key) == "max_failures") {
      if (!(value >= 0 && value <= 64) || value != static_cast<int>(value)) {
        flock::fail(flock::ErrorCode::InvalidArgument, "max_failures must be an integer in [0, 64]");
      }
      params->p.max_failures = static_cast<int>(value);
      return;
    }
    double* f = field(params->p, key);
    if (!f) flock::fail(flock::ErrorCode::InvalidArgument, std::string("unknown parameter '") + key + "'");
    *f = value;
  });
}

flock_status flock_params_get(const flock_params* params, const char* key, double* value) {
  return guard([&] {
    need(params, "params");
    need(key, "key");
    need(value, "value");
    auto copy = params->p;
    if (std::string(key) == "max_failures") {
      *value = copy.max_failures;
      return;
    }
    double* f = field(copy, key);
    if (!f) flock::fail(flock::ErrorCode::InvalidArgument, std::string("unknown parameter '") + key + "'");
    *value = *f;
  });
}

flock_status flock_params_validate(const flock_params* params) {
  return guard([&] {
    need(params, "params");
    params->p.validate();
  });
}

void flock_params_free(flock_params* params) { delete params; }

// Scenarios and simulation

flock_status flock_scenario_load(const char* path, flock_scenario** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    *out = new flock_scenario{flock::load_scenario(path)};
  });
}

flock_status flock_scenario_parse(const char* text, flock_scenario** out) {
  return guard([&] {
    need(text, "text");
    need(out, "out");
    std::istringstream in(text);
    *out = new flock_scenario{flock::parse_scenario(in)};
  });
}

flock_status flock_scenario_random(const char* kind, int n, double min_rate, double max_rate,
                                   double device_link_fraction, flock_scenario** out) {
  return guard([&] {
    need(kind, "kind");
    need(out, "out");
    // Reuse the file parser so validation stays in one place.
    std::ostringstream text;
    text << "kind " << kind << "\nrandom " << n << ' ' << flock::format_double(min_rate) << ' '
         << flock::format_double(max_rate) << "\ndevice_link_fraction " << flock::format_double(device_link_fraction)
         << '\n';
    std::istringstream in(text.str());
    *out = new flock_scenario{flock::parse_scenario(in)};
  });
}

void flock_scenario_free(flock_scenario* scenario) { delete scenario; }

void flock_sim_config_default(flock_sim_config* c) {
  if (!c) return;
  const flock::SimConfig s;
  const flock::TrafficPattern t;
  c->app_flows = s.app_flows;
  c->probes_per_host = s.probes_per_host;
  c->noise_drop_max = s.noise_drop_max;
  c->seed = s.seed;
  c->emit_rtt = s.emit_rtt ? 1 : 0;
  c->skewed = t.kind == flock::TrafficKind::Skewed ? 1 : 0;
  c->hot_rack_fraction = t.hot_rack_fraction;
  c->hot_traffic_fraction = t.hot_traffic_fraction;
  c->mean_flow_bytes = t.mean_flow_bytes;
  c->pareto_shape = t.pareto_shape;
}

flock_status flock_simulate(const flock_topology* topo, const flock_scenario* scenario,
                            const flock_sim_config* config, flock_trace** out) {
  return guard([&] {
    need(topo, "topology");
    need(config, "config");
    need(out, "out");
    flock::SimConfig s;
    s.app_flows = config->app_flows;
    s.probes_per_host = config->probes_per_host;
    s.noise_drop_max = config->noise_drop_max;
    s.seed = config->seed;
    s.emit_rtt = config->emit_rtt != 0;
    flock::TrafficPattern t;
    t.kind = config->skewed ? flock::TrafficKind::Skewed : flock::TrafficKind::Uniform;
    t.hot_rack_fraction = config->hot_rack_fraction;
    t.hot_traffic_fraction = config->hot_traffic_fraction;
    t.mean_flow_bytes = config->mean_flow_bytes;
    t.pareto_shape = config->pareto_shape;
    const flock::FailureScenario none;
    *out = new flock_trace{flock::simulate(topo->topo, scenario ? scenario->s : none, t, s)};
  });
}

// Traces

flock_status flock_trace_load(const char* path, const flock_topology* topo, flock_trace** out) {
  return guard([&] {
    need(path, "path");
    need(topo, "topology");
    need(out, "out");
    *out = new flock_trace{flock::load_trace(path, topo->topo)};
  });
}

flock_status flock_trace_save(const flock_trace* trace, const char* path) {
  return guard([&] {
    need(trace, "trace");
    need(path, "path");
    flock::save_trace(path, trace->t);
  });
}

size_t flock_trace_record_count(const flock_trace* trace) { return trace ? trace->t.records.size() : 0; }
size_t flock_trace_failure_count(const flock_trace* trace) { return trace ? trace->t.truth.failures.size() : 0; }

flock_status flock_trace_failure(const flock_trace* trace, size_t index, uint32_t* id, double* rate,
                                 uint32_t* parent) {
  return guard([&] {
    need(trace, "trace");
    if (index >= trace->t.truth.failures.size()) {
      flock::fail(flock::ErrorCode::InvalidArgument, "failure index out of range");
    }
    const auto& f = trace->t.truth.failures[index];
    if (id) *id = f.id;
    if (rate) *rate = f.drop_rate;
    if (parent) *parent = f.parent;
  });
}

void flock_trace_free(flock_trace* trace) { delete trace; }

// Hypotheses

flock_status flock_hypothesis_create(const uint32_t* ids, size_t n, flock_hypothesis** out) {
  return guard([&] {
    need(out, "out");
    if (n > 0) need(ids, "ids");
    *out = wrap(flock::Hypothesis(std::vector<flock::ComponentId>(ids, ids + n)));
  });
}

flock_status flock_hypothesis_load(const char* path, const flock_topology* topo, flock_hypothesis** out) {
  return guard([&] {
    need(path, "path");
    need(topo, "topology");
    need(out, "out");
    *out = wrap(flock::load_hypothesis(path, topo->topo));
  });
}

flock_status flock_hypothesis_save(const flock_hypothesis* h, const char* path) {
  return guard([&] {
    need(h, "hypothesis");
    need(path, "path");
    flock::save_hypothesis(path, h->h);
  });
}

size_t flock_hypothesis_size(const flock_hypothesis* h) { return h ? h->h.size() : 0; }

uint32_t flock_hypothesis_get(const flock_hypothesis* h, size_t index) {
  return h && index < h->h.size() ? h->h.ids()[index] : UINT32_MAX;
}

void flock_hypothesis_free(flock_hypothesis* h) { delete h; }

// Inference

void flock_infer_options_default(flock_infer_options* o) {
  if (!o) return;
  const flock::InferOptions d;
  o->use_jle = d.use_jle ? 1 : 0;
  o->include_devices = d.include_devices ? 1 : 0;
  o->reduce_passive = d.reduce_passive ? 1 : 0;
  o->per_flow = d.per_flow ? 1 : 0;
  o->sherlock_budget = d.sherlock_budget;
}

flock_status flock_infer(const flock_topology* topo, const flock_trace* trace, const char* kind,
                         const char* scheme, const flock_params* params, const flock_infer_options* options,
                         flock_inference** out) {
  return guard([&] {
    need(topo, "topology");
    need(trace, "trace");
    need(kind, "kind");
    need(scheme, "scheme");
    need(params, "params");
    need(out, "out");
    flock::InferOptions o;
    if (options) {
      o.use_jle = options->use_jle != 0;
      o.include_devices = options->include_devices != 0;
      o.reduce_passive = options->reduce_passive != 0;
      o.per_flow = options->per_flow != 0;
      o.sherlock_budget = options->sherlock_budget;
    }
    auto r = flock::infer(trace->t.records, topo->topo, flock::parse_input_kind(kind), params->p, o,
                          flock::parse_scheme(scheme));
    *out = new flock_inference{std::move(r)};
  });
}

flock_status flock_inference_hypothesis(const flock_inference* inf, flock_hypothesis** out) {
  return guard([&] {
    need(inf, "inference");
    need(out, "out");
    *out = wrap(inf->r.hypothesis);
  });
}

uint64_t flock_inference_hypotheses_scanned(const flock_inference* inf) {
  return inf ? inf->r.hypotheses_scanned : 0;
}

int flock_inference_class_level(const flock_inference* inf) { return inf && inf->r.class_level ? 1 : 0; }

flock_status flock_inference_iterations_csv(const flock_inference* inf, char** out) {
  return guard([&] {
    need(inf, "inference");
    need(out, "out");
    std::ostringstream s;
    flock::write_iterations_csv(s, inf->r.search);
    *out = dup(s.str());
  });
}

void flock_inference_free(flock_inference* inf) { delete inf; }

// Scoring

flock_status flock_score(const flock_topology* topo, const flock_hypothesis* predicted, const flock_trace* trace,
                         int class_level, flock_eval_result* out) {
  return guard([&] {
    need(topo, "topology");
    need(predicted, "hypothesis");
    need(trace, "trace");
    need(out, "out");
    flock::EvalReport rep;
    if (class_level) {
      const auto red = flock::reduced_topology(topo->topo);
      rep = flock::score(predicted->h, trace->t.truth, topo->topo, &red);
    } else {
      rep = flock::score(predicted->h, trace->t.truth, topo->topo);
    }
    out->precision = rep.precision;
    out->recall = rep.recall;
    out->fscore = rep.fscore;
    out->predicted = rep.predicted;
    out->correct = rep.correct;
    out->has_classes = rep.has_classes ? 1 : 0;
    out->class_precision = rep.class_precision;
    out->class_recall = rep.class_recall;
    out->precision_bound = rep.precision_bound;
  });
}

// Calibration

flock_status flock_calibrate(const flock_topology* topo, const flock_trace* const* traces, size_t n,
                             const char* scheme, const char* kind, const flock_params* base,
                             flock_calibration** out) {
  return guard([&] {
    need(topo, "topology");
    need(scheme, "scheme");
    need(kind, "kind");
    need(out, "out");
    if (n > 0) need(traces, "traces");
    flock::TrainingSet ts;
    ts.topo = &topo->topo;
    for (size_t i = 0; i < n; ++i) {
      need(traces[i], "trace");
      ts.traces.push_back(&traces[i]->t);
    }
    const flock::ModelParams b = base ? base->p : flock::ModelParams{};
    auto cal = std::make_unique<flock_calibration>();
    cal->frontier = flock::grid_search(flock::parse_scheme(scheme), flock::default_grid(), ts,
                                       flock::parse_input_kind(kind), b);
    cal->choice = flock::choose_operating_point(cal->frontier);
    *out = cal.release();
  });
}

size_t flock_calibration_frontier_size(const flock_calibration* cal) { return cal ? cal->frontier.size() : 0; }

flock_status flock_calibration_point(const flock_calibration* cal, size_t index, double* precision,
                                     double* recall) {
  return guard([&] {
    need(cal, "calibration");
    if (index >= cal->frontier.size()) flock::fail(flock::ErrorCode::InvalidArgument, "frontier index out of range");
    if (precision) *precision = cal->frontier[index].precision;
    if (recall) *recall = cal->frontier[index].recall;
  });
}

flock_status flock_calibration_choice(const flock_calibration* cal, flock_params** params, double* threshold,
                                      int* fallback) {
  return guard([&] {
    need(cal, "calibration");
    if (params) *params = new flock_params{cal->choice.point.params};
    if (threshold) *threshold = cal->choice.threshold;
    if (fallback) *fallback = cal->choice.fallback ? 1 : 0;
  });
}

flock_status flock_calibration_frontier_csv(const flock_calibration* cal, char** out) {
  return guard([&] {
    need(cal, "calibration");
    need(out, "out");
    std::ostringstream s;
    flock::write_frontier_csv(s, cal->frontier);
    *out = dup(s.str());
  });
}

void flock_calibration_free(flock_calibration* cal) { delete cal; }

// Benchmark

flock_status flock_bench(const flock_topology* topo, const flock_trace* trace, const char* kind,
                         const flock_params* params, const char* schemes, int runs, char** csv) {
  return guard([&] {
    need(topo, "topology");
    need(trace, "trace");
    need(kind, "kind");
    need(params, "params");
    need(csv, "csv");
    flock::BenchOptions o;
    o.runs = runs;
    if (schemes) {
      o.schemes.clear();
      std::istringstream in(schemes);
      for (std::string s; std::getline(in, s, ',');) {
        if (!s.empty()) o.schemes.push_back(s);
      }
    }
    const auto rep = flock::bench(trace->t.records, topo->topo, flock::parse_input_kind(kind), params->p, o);
    std::ostringstream s;
    flock::write_bench_csv(s, rep);
    *csv = dup(s.str());
  });
}

}  // extern "C"
