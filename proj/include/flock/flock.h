#ifndef FLOCK_FLOCK_H
#define FLOCK_FLOCK_H

#include <stddef.h>
#include <stdint.h>

#if defined(FLOCK_BUILDING_LIBRARY)
#define FLOCK_API __attribute__((visibility("default")))
#else
#define FLOCK_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Every fallible call returns a status. On failure the message is kept per
   thread until the next failing call on that thread. */
typedef enum flock_status {
  FLOCK_OK = 0,
  FLOCK_ERR_INVALID_ARGUMENT = 1,
  FLOCK_ERR_PARSE = 2,
  FLOCK_ERR_IO = 3,
  FLOCK_ERR_NO_USABLE_INPUT = 4,
  FLOCK_ERR_BUDGET_EXCEEDED = 5,
  FLOCK_ERR_INFEASIBLE = 6,
  FLOCK_ERR_INTERNAL = 7
} flock_status;

FLOCK_API const char* flock_version(void);
FLOCK_API const char* flock_last_error(void);
FLOCK_API const char* flock_status_name(flock_status status);

typedef struct flock_topology flock_topology;
typedef struct flock_params flock_params;
typedef struct flock_scenario flock_scenario;
typedef struct flock_trace flock_trace;
typedef struct flock_hypothesis flock_hypothesis;
typedef struct flock_inference flock_inference;
typedef struct flock_calibration flock_calibration;

/* Strings returned through char** are owned by the caller. */
FLOCK_API void flock_string_free(char* s);

/* Topology */
FLOCK_API flock_status flock_topology_fat_tree(int k, int hosts_per_tor, flock_topology** out);
FLOCK_API flock_status flock_topology_two_tier(int spines, int leaves, int hosts_per_leaf, flock_topology** out);
FLOCK_API flock_status flock_topology_omit_links(const flock_topology* topo, double fraction, uint64_t seed,
                                                 flock_topology** out);
FLOCK_API flock_status flock_topology_load(const char* path, flock_topology** out);
FLOCK_API flock_status flock_topology_parse(const char* text, flock_topology** out);
FLOCK_API flock_status flock_topology_save(const flock_topology* topo, const char* path);
FLOCK_API flock_status flock_topology_serialize(const flock_topology* topo, char** out);
FLOCK_API size_t flock_topology_component_count(const flock_topology* topo);
FLOCK_API size_t flock_topology_link_count(const flock_topology* topo);
FLOCK_API size_t flock_topology_device_count(const flock_topology* topo);
FLOCK_API size_t flock_topology_host_count(const flock_topology* topo);
FLOCK_API uint64_t flock_topology_checksum(const flock_topology* topo);
/* Number of link equivalence classes seen by host-to-host traffic. */
FLOCK_API flock_status flock_topology_class_count(const flock_topology* topo, size_t* out);
FLOCK_API void flock_topology_free(flock_topology* topo);

/* Model parameters. Keys: p_g, p_b, rho_link, device_prior_log_factor,
   rtt_threshold_ms, vote_threshold, max_failures. */
FLOCK_API flock_status flock_params_default(flock_params** out);
FLOCK_API flock_status flock_params_load(const char* path, flock_params** out);
FLOCK_API flock_status flock_params_parse(const char* text, flock_params** out);
FLOCK_API flock_status flock_params_save(const flock_params* params, const char* path);
FLOCK_API flock_status flock_params_set(flock_params* params, const char* key, double value);
FLOCK_API flock_status flock_params_get(const flock_params* params, const char* key, double* value);
FLOCK_API flock_status flock_params_validate(const flock_params* params);
FLOCK_API void flock_params_free(flock_params* params);

/* Failure scenarios */
FLOCK_API flock_status flock_scenario_load(const char* path, flock_scenario** out);
FLOCK_API flock_status flock_scenario_parse(const char* text, flock_scenario** out);
/* kind: "silent" or "device"; n random failures with rates in [min_rate, max_rate]. */
FLOCK_API flock_status flock_scenario_random(const char* kind, int n, double min_rate, double max_rate,
                                             double device_link_fraction, flock_scenario** out);
FLOCK_API void flock_scenario_free(flock_scenario* scenario);

typedef struct flock_sim_config {
  uint64_t app_flows;
  uint64_t probes_per_host;
  double noise_drop_max;
  uint64_t seed;
  int emit_rtt;
  int skewed; /* 0 uniform, 1 hot racks */
  double hot_rack_fraction;
  double hot_traffic_fraction;
  double mean_flow_bytes;
  double pareto_shape;
} flock_sim_config;

FLOCK_API void flock_sim_config_default(flock_sim_config* config);
/* scenario may be NULL for a failure-free run. */
FLOCK_API flock_status flock_simulate(const flock_topology* topo, const flock_scenario* scenario,
                                      const flock_sim_config* config, flock_trace** out);

/* Traces */
FLOCK_API flock_status flock_trace_load(const char* path, const flock_topology* topo, flock_trace** out);
FLOCK_API flock_status flock_trace_save(const flock_trace* trace, const char* path);
FLOCK_API size_t flock_trace_record_count(const flock_trace* trace);
FLOCK_API size_t flock_trace_failure_count(const flock_trace* trace);
/* parent is UINT32_MAX unless the link failed with a device. */
FLOCK_API flock_status flock_trace_failure(const flock_trace* trace, size_t index, uint32_t* id, double* rate,
                                           uint32_t* parent);
FLOCK_API void flock_trace_free(flock_trace* trace);

/* Hypotheses */
FLOCK_API flock_status flock_hypothesis_create(const uint32_t* ids, size_t n, flock_hypothesis** out);
FLOCK_API flock_status flock_hypothesis_load(const char* path, const flock_topology* topo, flock_hypothesis** out);
FLOCK_API flock_status flock_hypothesis_save(const flock_hypothesis* h, const char* path);
FLOCK_API size_t flock_hypothesis_size(const flock_hypothesis* h);
/* Ids in ascending order. */
FLOCK_API uint32_t flock_hypothesis_get(const flock_hypothesis* h, size_t index);
FLOCK_API void flock_hypothesis_free(flock_hypothesis* h);

/* Inference. kind: A1, A2, P, INT, A1+P, A2+P, A1+A2+P.
   scheme: flock, vote007, sherlock. */
typedef struct flock_infer_options {
  int use_jle;
  int include_devices;
  int reduce_passive;
  int per_flow;
  double sherlock_budget;
} flock_infer_options;

FLOCK_API void flock_infer_options_default(flock_infer_options* options);
/* options may be NULL for the defaults. */
FLOCK_API flock_status flock_infer(const flock_topology* topo, const flock_trace* trace, const char* kind,
                                   const char* scheme, const flock_params* params,
                                   const flock_infer_options* options, flock_inference** out);
FLOCK_API flock_status flock_inference_hypothesis(const flock_inference* inf, flock_hypothesis** out);
FLOCK_API uint64_t flock_inference_hypotheses_scanned(const flock_inference* inf);
FLOCK_API int flock_inference_class_level(const flock_inference* inf);
FLOCK_API flock_status flock_inference_iterations_csv(const flock_inference* inf, char** out);
FLOCK_API void flock_inference_free(flock_inference* inf);

/* Scoring against a trace's ground truth */
typedef struct flock_eval_result {
  double precision;
  double recall;
  double fscore;
  size_t predicted;
  size_t correct;
  int has_classes;
  double class_precision;
  double class_recall;
  double precision_bound;
} flock_eval_result;

/* class_level nonzero adds the equivalence-class view. */
FLOCK_API flock_status flock_score(const flock_topology* topo, const flock_hypothesis* predicted,
                                   const flock_trace* trace, int class_level, flock_eval_result* out);

/* Calibration over training traces sharing one topology. Uses the default
   grid; the chosen operating point follows the stepped precision bar. */
FLOCK_API flock_status flock_calibrate(const flock_topology* topo, const flock_trace* const* traces, size_t n,
                                       const char* scheme, const char* kind, const flock_params* base,
                                       flock_calibration** out);
FLOCK_API size_t flock_calibration_frontier_size(const flock_calibration* cal);
FLOCK_API flock_status flock_calibration_point(const flock_calibration* cal, size_t index, double* precision,
                                               double* recall);
/* The chosen point's params, its precision bar, and whether the bar fell
   through to the max-recall fallback. */
FLOCK_API flock_status flock_calibration_choice(const flock_calibration* cal, flock_params** params,
                                                double* threshold, int* fallback);
FLOCK_API flock_status flock_calibration_frontier_csv(const flock_calibration* cal, char** out);
FLOCK_API void flock_calibration_free(flock_calibration* cal);

/* Benchmark. schemes: comma separated list of greedy+jle, greedy,
   sherlock+jle, sherlock, vote007; NULL for all. Writes the bench CSV. */
FLOCK_API flock_status flock_bench(const flock_topology* topo, const flock_trace* trace, const char* kind,
                                   const flock_params* params, const char* schemes, int runs, char** csv);

#ifdef __cplusplus
}
#endif

#endif
