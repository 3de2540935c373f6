/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#ifndef DS_CONSENSUS_H
#define DS_CONSENSUS_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes. Zero is success.
typedef enum DsStatus {
  DS_STATUS_OK = 0,
  DS_STATUS_NULL_POINTER = 1,
  DS_STATUS_INVALID_ARGUMENT = 2,
  DS_STATUS_INVALID_UTF8 = 3,
  DS_STATUS_PARSE = 4,
  DS_STATUS_INVALID_SCENARIO = 5,
  DS_STATUS_UNKNOWN_SCENARIO = 6,
  DS_STATUS_ENGINE_MISMATCH = 7,
  DS_STATUS_DYNAMICS = 8,
  DS_STATUS_IO = 9,
  DS_STATUS_RUNTIME = 10,
  DS_STATUS_PANIC = 11,
} DsStatus;

// A body of evidence.
typedef struct DsBoe DsBoe;

// The outcome of one simulation run.
typedef struct DsRun DsRun;

// A materialized scenario.
typedef struct DsScenario DsScenario;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Description of the last failure on this thread, or null when the last
// call succeeded. Valid until the next call on the same thread.
const char *ds_last_error_message(void);

// Release a string returned by this library. Null is ignored.
//
// # Safety
// `s` must come from this library and not have been freed.
void ds_string_free(char *s);

// Library version as a static string.
const char *ds_version(void);

// Build a body of evidence from `len = 2^frame_size` masses indexed by
// bitmask. The masses must be non-negative, sum to one and leave the
// empty set at zero.
//
// # Safety
// `masses` must point to `len` readable doubles; `out` must be writable.
enum DsStatus ds_boe_new(size_t frame_size,
                         const double *masses,
                         size_t len,
                         struct DsBoe **out_boe);

// Parse `{"frame_size": 3, "masses": {"1": 0.5, "*": 0.5}}`.
//
// # Safety
// `json` must be a nul-terminated string; `out` must be writable.
enum DsStatus ds_boe_from_json(const char *json, struct DsBoe **out_boe);

// # Safety
// `boe` must come from this library and not have been freed. Null is ignored.
void ds_boe_free(struct DsBoe *boe);

// # Safety
// `boe` must be a live handle; `out` must be writable.
enum DsStatus ds_boe_frame_size(const struct DsBoe *boe, size_t *out_size);

// # Safety
// `boe` must be a live handle; `out` must be writable.
enum DsStatus ds_boe_mass(const struct DsBoe *boe, uint32_t prop, double *out_mass);

// # Safety
// `boe` must be a live handle; `out` must be writable.
enum DsStatus ds_boe_belief(const struct DsBoe *boe, uint32_t prop, double *out_value);

// # Safety
// `boe` must be a live handle; `out` must be writable.
enum DsStatus ds_boe_plausibility(const struct DsBoe *boe, uint32_t prop, double *out_value);

// Fagin–Halpern conditional belief `Bl(b | a)`.
//
// # Safety
// `boe` must be a live handle; `out` must be writable.
enum DsStatus ds_boe_conditional_belief(const struct DsBoe *boe,
                                        uint32_t b,
                                        uint32_t a,
                                        double *out_value);

// Jousselme distance between two bodies of evidence on the same frame.
//
// # Safety
// Both handles must be live; `out` must be writable.
enum DsStatus ds_boe_distance(const struct DsBoe *a, const struct DsBoe *b, double *out_value);

// # Safety
// `boe` must be a live handle; `out` must be writable. Free the result
// with [`ds_string_free`].
enum DsStatus ds_boe_to_json(const struct DsBoe *boe, char **out_json);

// Load a scenario file or built-in asset by name.
//
// # Safety
// `name` must be a nul-terminated string; `out` must be writable.
enum DsStatus ds_scenario_load(const char *name, struct DsScenario **out_scenario);

// Build a scenario from JSON text. Relative graph files resolve against
// the working directory.
//
// # Safety
// `json` must be a nul-terminated string; `out` must be writable.
enum DsStatus ds_scenario_from_json(const char *json, struct DsScenario **out_scenario);

// # Safety
// `scenario` must come from this library and not have been freed. Null
// is ignored.
void ds_scenario_free(struct DsScenario *scenario);

// # Safety
// `scenario` must be a live handle; `out` must be writable.
enum DsStatus ds_scenario_agent_count(const struct DsScenario *scenario, size_t *out_count);

// # Safety
// `scenario` must be a live handle; `out` must be writable.
enum DsStatus ds_scenario_frame_size(const struct DsScenario *scenario, size_t *out_size);

// Initial opinion of one agent, as a new handle.
//
// # Safety
// `scenario` must be a live handle; `out` must be writable.
enum DsStatus ds_scenario_initial_opinion(const struct DsScenario *scenario,
                                          size_t agent,
                                          struct DsBoe **out_boe);

// Iterate the scenario until it settles. Pass `NaN` as `epsilon` to keep
// the scenario's bounds of confidence.
//
// # Safety
// `scenario` must be a live handle; `out` must be writable.
enum DsStatus ds_run(const struct DsScenario *scenario, double epsilon, struct DsRun **out_run);

// # Safety
// `run` must come from this library and not have been freed. Null is ignored.
void ds_run_free(struct DsRun *run);

// # Safety
// `run` must be a live handle; `out` must be writable.
enum DsStatus ds_run_cluster_count(const struct DsRun *run, size_t *out_count);

// # Safety
// `run` must be a live handle; `out` must be writable.
enum DsStatus ds_run_consensus(const struct DsRun *run, bool *out_flag);

// # Safety
// `run` must be a live handle; `out` must be writable.
enum DsStatus ds_run_converged(const struct DsRun *run, bool *out_flag);

// # Safety
// `run` must be a live handle; `out` must be writable.
enum DsStatus ds_run_iterations(const struct DsRun *run, size_t *out_count);

// 0-based cluster index of `agent`.
//
// # Safety
// `run` must be a live handle; `out` must be writable.
enum DsStatus ds_run_cluster_label(const struct DsRun *run, size_t agent, size_t *out_label);

// Final opinion of one agent, as a new handle.
//
// # Safety
// `run` must be a live handle; `out` must be writable.
enum DsStatus ds_run_final_opinion(const struct DsRun *run, size_t agent, struct DsBoe **out_boe);

// Cluster report as JSON (0-based agent and cluster ids).
//
// # Safety
// `run` must be a live handle; `out` must be writable. Free the result
// with [`ds_string_free`].
enum DsStatus ds_run_report_json(const struct DsRun *run, char **out_json);

// Sweep ε over `eps_min, eps_min + eps_step, …, eps_max` on `workers`
// threads (0 = all cores) and return the bifurcation CSV for `prop`.
//
// # Safety
// `scenario` must be a live handle; `out` must be writable. Free the
// result with [`ds_string_free`].
enum DsStatus ds_sweep_csv(const struct DsScenario *scenario,
                           double eps_min,
                           double eps_max,
                           double eps_step,
                           uint32_t prop,
                           size_t workers,
                           char **out_csv);

// Run the scenario and check the leader-chain conditions with its
// cautious agents as central groups; returns the JSON report.
//
// # Safety
// `scenario` must be a live handle; `out` must be writable. Free the
// result with [`ds_string_free`].
enum DsStatus ds_verify_json(const struct DsScenario *scenario, double epsilon, char **out_json);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DS_CONSENSUS_H */
