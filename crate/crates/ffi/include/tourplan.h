#ifndef TOURPLAN_H
#define TOURPLAN_H

#pragma once

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes. Zero is success.
 */
typedef enum TpStatus {
  TP_STATUS_OK = 0,
  /**
   * A null pointer, bad index or out-of-range option.
   */
  TP_STATUS_INVALID_ARGUMENT = 1,
  /**
   * The instance document or the problem data is invalid.
   */
  TP_STATUS_INVALID_INPUT = 2,
  TP_STATUS_INFEASIBLE = 3,
  /**
   * Time limit reached before any feasible plan was found.
   */
  TP_STATUS_TIME_LIMIT = 4,
  /**
   * Numerical failure or a panic inside the library.
   */
  TP_STATUS_INTERNAL = 5,
} TpStatus;

/**
 * Opaque instance handle.
 */
typedef struct TpInstance TpInstance;

/**
 * Opaque solve result.
 */
typedef struct TpPlan TpPlan;

/**
 * Solve settings. Start from [`tp_solve_options_default`].
 */
typedef struct TpSolveOptions {
  double epsilon;
  /**
   * Stop once the relative gap is at or below this value.
   */
  double gap;
  /**
   * Seconds; zero or negative means no limit.
   */
  double time_limit;
  /**
   * Number of tours, at least 1.
   */
  uint32_t tours;
  /**
   * With several tours, start them at distinct bases.
   */
  bool disjoint;
  /**
   * Let trips end at a different base.
   */
  bool non_cyclic;
} TpSolveOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer
 * stays valid until the next call into this library on the same thread.
 */
const char *tp_last_error_message(void);

/**
 * Library version as a static string.
 */
const char *tp_version(void);

/**
 * Parses an instance document.
 *
 * # Safety
 * `json` must be a valid NUL-terminated string and `out` a valid pointer.
 */
enum TpStatus tp_instance_from_json(const char *json, struct TpInstance **out);

/**
 * Reads an instance document from a file.
 *
 * # Safety
 * `path` must be a valid NUL-terminated string and `out` a valid pointer.
 */
enum TpStatus tp_instance_from_file(const char *path, struct TpInstance **out);

/**
 * # Safety
 * `inst` must come from this library and not be used afterwards. Null is
 * ignored.
 */
void tp_instance_free(struct TpInstance *inst);

/**
 * Number of POIs, or 0 for a null handle.
 *
 * # Safety
 * `inst` must be null or a live instance handle.
 */
size_t tp_instance_poi_count(const struct TpInstance *inst);

/**
 * Switches the instance to reward maximization under `budget`.
 *
 * # Safety
 * `inst` must be a live instance handle.
 */
enum TpStatus tp_instance_set_rmt(struct TpInstance *inst, double budget);

/**
 * Switches the instance to time minimization with reward `requirement`.
 *
 * # Safety
 * `inst` must be a live instance handle.
 */
enum TpStatus tp_instance_set_bmt(struct TpInstance *inst, double requirement);

struct TpSolveOptions tp_solve_options_default(void);

/**
 * Solves the instance. `options` may be null for the defaults.
 *
 * # Safety
 * `inst` must be a live instance handle, `options` null or valid, and
 * `out` a valid pointer.
 */
enum TpStatus tp_solve(const struct TpInstance *inst,
                       const struct TpSolveOptions *options,
                       struct TpPlan **out);

/**
 * Exhaustive optimum for small instances.
 *
 * # Safety
 * `inst` must be a live instance handle and `value` a valid pointer.
 */
enum TpStatus tp_oracle(const struct TpInstance *inst, double *value);

/**
 * # Safety
 * `plan` must come from [`tp_solve`] and not be used afterwards. Null is
 * ignored.
 */
void tp_plan_free(struct TpPlan *plan);

/**
 * Total true reward for reward maximization, total time otherwise. NaN
 * for a null handle.
 *
 * # Safety
 * `plan` must be null or a live plan handle.
 */
double tp_plan_objective(const struct TpPlan *plan);

/**
 * # Safety
 * `plan` must be null or a live plan handle.
 */
double tp_plan_true_reward(const struct TpPlan *plan);

/**
 * # Safety
 * `plan` must be null or a live plan handle.
 */
double tp_plan_total_time(const struct TpPlan *plan);

/**
 * Relative gap at termination.
 *
 * # Safety
 * `plan` must be null or a live plan handle.
 */
double tp_plan_gap(const struct TpPlan *plan);

/**
 * # Safety
 * `plan` must be null or a live plan handle.
 */
size_t tp_plan_tour_count(const struct TpPlan *plan);

/**
 * Start base of `tour`, or 0 when out of range.
 *
 * # Safety
 * `plan` must be null or a live plan handle.
 */
uint32_t tp_plan_start_base(const struct TpPlan *plan, size_t tour);

/**
 * Number of stays in `tour`, or 0 when out of range.
 *
 * # Safety
 * `plan` must be null or a live plan handle.
 */
size_t tp_plan_stop_count(const struct TpPlan *plan, size_t tour);

/**
 * The `index`-th stay of `tour`: POI id (1-based) and duration.
 *
 * # Safety
 * `plan` must be a live plan handle; `poi` and `duration` valid pointers.
 */
enum TpStatus tp_plan_stop(const struct TpPlan *plan,
                           size_t tour,
                           size_t index,
                           uint32_t *poi,
                           double *duration);

/**
 * The plan as a JSON document (same shape as the CLI's itinerary file).
 * Free the result with [`tp_string_free`]. Null for a null handle.
 *
 * # Safety
 * `plan` must be null or a live plan handle.
 */
char *tp_plan_to_json(const struct TpPlan *plan);

/**
 * # Safety
 * `s` must come from this library and not be used afterwards. Null is
 * ignored.
 */
void tp_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TOURPLAN_H */
