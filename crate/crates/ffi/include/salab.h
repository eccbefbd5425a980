#ifndef SALAB_H
#define SALAB_H

/* Generated by cbindgen; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible entry point.
 */
typedef enum SalabStatus {
  SALAB_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  SALAB_STATUS_NULL_POINTER = 1,
  /**
   * An argument was not valid UTF-8 or otherwise malformed.
   */
  SALAB_STATUS_INVALID_ARGUMENT = 2,
  /**
   * The config document is not valid JSON.
   */
  SALAB_STATUS_CONFIG_PARSE = 3,
  /**
   * The config contains a key the schema does not know.
   */
  SALAB_STATUS_CONFIG_UNKNOWN_FIELD = 4,
  /**
   * A config value failed validation.
   */
  SALAB_STATUS_CONFIG_VALIDATION = 5,
  /**
   * The run aborted inside the engine.
   */
  SALAB_STATUS_ENGINE = 6,
} SalabStatus;

/**
 * Opaque parsed-and-validated run configuration.
 */
typedef struct SalabConfig SalabConfig;

/**
 * Opaque result of a finished run: the summary plus the full trace.
 */
typedef struct SalabSummary SalabSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread, or null if none.
 * The pointer stays valid until the next failing call on the same thread.
 */
const char *salab_last_error(void);

/**
 * Parse a JSON config. On success writes a handle to `out`; free it with
 * [`salab_config_free`].
 *
 * # Safety
 * `json` must point to a NUL-terminated string and `out` must be a valid
 * pointer.
 */
enum SalabStatus salab_config_parse(const char *json, struct SalabConfig **out);

/**
 * Override the seed of a parsed config.
 *
 * # Safety
 * `cfg` must be a handle returned by [`salab_config_parse`].
 */
enum SalabStatus salab_config_set_seed(struct SalabConfig *cfg, uint64_t seed);

/**
 * # Safety
 * `cfg` must be a handle returned by [`salab_config_parse`], or null.
 */
void salab_config_free(struct SalabConfig *cfg);

/**
 * Run the experiment described by `cfg`. On success writes a summary handle
 * to `out`; free it with [`salab_summary_free`].
 *
 * # Safety
 * `cfg` must be a live config handle and `out` a valid pointer.
 */
enum SalabStatus salab_run(const struct SalabConfig *cfg, struct SalabSummary **out);

/**
 * Pretty-printed summary JSON; owned by the handle.
 *
 * # Safety
 * `s` must be a live summary handle.
 */
const char *salab_summary_json(const struct SalabSummary *s);

/**
 * Full trace in CSV form; owned by the handle.
 *
 * # Safety
 * `s` must be a live summary handle.
 */
const char *salab_summary_trace_csv(const struct SalabSummary *s);

/**
 * Number of truncation events, or 0 for a null handle.
 *
 * # Safety
 * `s` must be a live summary handle or null.
 */
uint64_t salab_summary_truncations(const struct SalabSummary *s);

/**
 * Dimension of the final iterate, or 0 for a null handle.
 *
 * # Safety
 * `s` must be a live summary handle or null.
 */
uintptr_t salab_summary_theta_dim(const struct SalabSummary *s);

/**
 * Copy the final iterate into `buf` (capacity `len`); returns the number of
 * coordinates written.
 *
 * # Safety
 * `s` must be a live summary handle; `buf` must point to at least `len`
 * writable doubles.
 */
uintptr_t salab_summary_final_theta(const struct SalabSummary *s, double *buf, uintptr_t len);

/**
 * # Safety
 * `s` must be a handle returned by [`salab_run`], or null.
 */
void salab_summary_free(struct SalabSummary *s);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* SALAB_H */
