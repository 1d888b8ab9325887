/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef CORTEX_H
#define CORTEX_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CortexStatus {
  CORTEX_STATUS_OK = 0,
  CORTEX_STATUS_NULL_POINTER = 1,
  CORTEX_STATUS_INVALID_ARGUMENT = 2,
  CORTEX_STATUS_CONFIG = 3,
  CORTEX_STATUS_CAPACITY = 4,
  CORTEX_STATUS_TOPOLOGY = 5,
  CORTEX_STATUS_PRECONDITION = 6,
  CORTEX_STATUS_DEGENERATE = 7,
  CORTEX_STATUS_SEQUENCING = 8,
  CORTEX_STATUS_EMPTY_SYNAPSE = 9,
  CORTEX_STATUS_AGENT_CAP = 10,
  CORTEX_STATUS_IO = 11,
  /**
   * Output buffer too small; the required length was still written.
   */
  CORTEX_STATUS_BUFFER_TOO_SMALL = 12,
  /**
   * Nothing to return (e.g. no pending trigger).
   */
  CORTEX_STATUS_EMPTY = 13,
  CORTEX_STATUS_INTERNAL = 99,
} CortexStatus;

/**
 * Streaming trigger detector with a queue of detected triggers.
 */
typedef struct CortexRouter CortexRouter;

/**
 * Result of one `cortex_runtime_run`.
 */
typedef struct CortexRun CortexRun;

/**
 * Shared weights plus the agent registry.
 */
typedef struct CortexRuntime CortexRuntime;

/**
 * Runtime knobs. Obtain defaults from [`cortex_runtime_config_default`].
 */
typedef struct CortexRuntimeConfig {
  size_t k;
  double lambda;
  double theta;
  size_t max_stream_agents;
  size_t thought_budget;
  size_t synapse_push_period;
  size_t max_new_tokens;
  bool single_lane;
} CortexRuntimeConfig;

typedef struct CortexMemoryReport {
  size_t weight_bytes;
  size_t agent_bytes;
  size_t total_bytes;
  size_t agent_count;
} CortexMemoryReport;

typedef struct CortexRunSummary {
  size_t triggers;
  size_t spawned;
  size_t injections;
  size_t rejections;
  size_t max_live_streams;
} CortexRunSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or NULL. Valid until the next
 * failing call on the same thread.
 */
const char *cortex_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *cortex_version(void);

struct CortexRuntimeConfig cortex_runtime_config_default(void);

/**
 * Builds the default toy model from `seed`.
 */
enum CortexStatus cortex_runtime_new(uint64_t seed,
                                     struct CortexRuntimeConfig config,
                                     struct CortexRuntime **runtime);

void cortex_runtime_free(struct CortexRuntime *runtime);

enum CortexStatus cortex_runtime_memory(const struct CortexRuntime *runtime,
                                        struct CortexMemoryReport *report);

/**
 * Runs the river over `prompt`. `script_json` may be NULL; otherwise a
 * NUL-terminated JSON script. On success `*run` must be released with
 * [`cortex_run_free`].
 */
enum CortexStatus cortex_runtime_run(const struct CortexRuntime *runtime,
                                     const uint8_t *prompt,
                                     size_t prompt_len,
                                     const char *script_json,
                                     struct CortexRun **run);

void cortex_run_free(struct CortexRun *run);

/**
 * Copies the generated token ids. `*len` always receives the full count.
 */
enum CortexStatus cortex_run_tokens(const struct CortexRun *run,
                                    uint32_t *buf,
                                    size_t cap,
                                    size_t *len);

enum CortexStatus cortex_run_summary(const struct CortexRun *run, struct CortexRunSummary *summary);

/**
 * Audit log as CSV bytes (no NUL terminator).
 */
enum CortexStatus cortex_run_audit_csv(const struct CortexRun *run,
                                       uint8_t *buf,
                                       size_t cap,
                                       size_t *len);

struct CortexRouter *cortex_router_new(void);

void cortex_router_free(struct CortexRouter *router);

/**
 * Feeds a chunk; `*found` receives how many triggers it completed.
 */
enum CortexStatus cortex_router_feed(struct CortexRouter *router,
                                     const uint8_t *data,
                                     size_t len,
                                     size_t *found);

/**
 * Pops the oldest pending trigger. Returns `CORTEX_STATUS_EMPTY` when none
 * is pending. If the payload does not fit, the trigger stays queued and
 * `*payload_len` holds the size needed.
 */
enum CortexStatus cortex_router_pop(struct CortexRouter *router,
                                    uint64_t *trigger_id,
                                    size_t *stream_position,
                                    uint8_t *payload,
                                    size_t cap,
                                    size_t *payload_len);

/**
 * Ends the stream; `*diagnostics` receives the number of dangling or
 * malformed patterns reported.
 */
enum CortexStatus cortex_router_flush(struct CortexRouter *router, size_t *diagnostics);

/**
 * Cosine similarity of two `dim`-wide vectors.
 */
enum CortexStatus cortex_gate_score(const float *h_main,
                                    const float *t_side,
                                    size_t dim,
                                    double *score);

/**
 * Gate decision. A zero vector is a rejection with `*degenerate` set and
 * `*score` NaN.
 */
enum CortexStatus cortex_gate_decide(const float *h_main,
                                     const float *t_side,
                                     size_t dim,
                                     double theta,
                                     bool *accepted,
                                     bool *degenerate,
                                     double *score);

/**
 * Directed Hausdorff distance from `n` cloud points to `m` landmark points,
 * both row-major with `dim` columns.
 */
enum CortexStatus cortex_hausdorff(const double *cloud,
                                   size_t n,
                                   const double *landmarks,
                                   size_t m,
                                   size_t dim,
                                   double *distance);

/**
 * Hybrid landmark selection over `n` row-major points with per-point
 * `density`. Writes `min(k, n)` indices in ascending order.
 */
enum CortexStatus cortex_select_landmarks(const double *points,
                                          size_t n,
                                          size_t dim,
                                          const double *density,
                                          size_t k,
                                          double lambda,
                                          size_t *indices,
                                          size_t cap,
                                          size_t *len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CORTEX_H */
