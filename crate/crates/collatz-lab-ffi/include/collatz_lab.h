/* C ABI for the collatz-lab workbench. Generated by cbindgen; do not edit. */

#pragma once

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result discipline for every FFI call.
 */
typedef enum CollatzStatus {
  COLLATZ_STATUS_OK = 0,
  /**
   * A pointer argument was null.
   */
  COLLATZ_STATUS_NULL_POINTER = 1,
  /**
   * Arguments outside the documented domain (bad multiplier, bad enum
   * value, malformed UTF-8 name).
   */
  COLLATZ_STATUS_INVALID_ARGUMENT = 2,
  /**
   * The computation is well-posed but ran out of its step budget.
   */
  COLLATZ_STATUS_TRUNCATED = 3,
  /**
   * The requested quantity does not exist (unknown constant name,
   * undefined statistic).
   */
  COLLATZ_STATUS_UNDEFINED = 4,
  /**
   * The result exists but does not fit the requested integer width.
   */
  COLLATZ_STATUS_OVERFLOW = 5,
  /**
   * A panic was caught at the boundary; state is unspecified but memory
   * safe.
   */
  COLLATZ_STATUS_PANIC = 6,
} CollatzStatus;

/**
 * Map variant selector mirroring the library's three forms.
 */
typedef enum CollatzVariant {
  /**
   * a*n + b on odds, halve evens.
   */
  COLLATZ_VARIANT_CLASSIC = 0,
  /**
   * (a*n + b)/2 on odds, halve evens.
   */
  COLLATZ_VARIANT_HALVED = 1,
  /**
   * (a*n + b) / 2^ord2(a*n + b) on odds only.
   */
  COLLATZ_VARIANT_ACCELERATED = 2,
} CollatzVariant;

/**
 * Opaque handle to a configured map.
 */
typedef struct CollatzMap CollatzMap;

/**
 * Orbit summary for one seed, plain-C layout. `sigma_infty` is u64::MAX
 * when the orbit did not reach 1 within the budget; ratio fields are NaN
 * when undefined (seed < 2 or stopping undefined).
 */
typedef struct CollatzOrbitStats {
  uint64_t sigma_infty;
  uint64_t ones;
  double ones_ratio;
  double gamma_ratio;
  double rho_ratio;
  double ln_max_excursion;
  bool budget_exhausted;
} CollatzOrbitStats;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *collatz_version(void);

/**
 * Static human-readable name for a status code.
 */
const char *collatz_status_name(enum CollatzStatus status);

/**
 * Create a map handle. On success writes an owned pointer to `out`;
 * release it with [`collatz_map_free`].
 *
 * # Safety
 * `out` must be a valid pointer to writable memory.
 */
enum CollatzStatus collatz_map_new(uint64_t multiplier,
                                   int64_t offset,
                                   enum CollatzVariant variant,
                                   struct CollatzMap **out);

/**
 * Release a handle from [`collatz_map_new`]. Null is a no-op.
 *
 * # Safety
 * `map` must be null or a pointer returned by `collatz_map_new` that has
 * not been freed yet.
 */
void collatz_map_free(struct CollatzMap *map);

/**
 * One step of the map. Fails with `Overflow` when the exact result does
 * not fit an i64, and `InvalidArgument` for even input to the accelerated
 * form.
 *
 * # Safety
 * `map` must be a live handle; `out` must be writable.
 */
enum CollatzStatus collatz_map_apply(const struct CollatzMap *map, int64_t n, int64_t *out);

/**
 * Total stopping time: steps until the orbit first reaches 1. `Truncated`
 * when the budget ran out first.
 *
 * # Safety
 * `map` must be a live handle; `out` must be writable.
 */
enum CollatzStatus collatz_total_stopping_time(const struct CollatzMap *map,
                                               uint64_t n,
                                               uint64_t budget,
                                               uint64_t *out);

/**
 * Full orbit summary for one seed.
 *
 * # Safety
 * `map` must be a live handle; `out` must be writable.
 */
enum CollatzStatus collatz_orbit_stats(const struct CollatzMap *map,
                                       int64_t seed,
                                       uint64_t budget,
                                       struct CollatzOrbitStats *out);

/**
 * Look up a predicted constant by its name (as listed by the `constants`
 * CLI subcommand), e.g. "gamma_rrw_3".
 *
 * # Safety
 * `name` must be a NUL-terminated string; `out` must be writable.
 */
enum CollatzStatus collatz_constant(const char *name, double *out);

/**
 * Extreme leaf counts (N_k-, N_k+) of the depth-k pruned inverse trees.
 *
 * # Safety
 * `out_min` and `out_max` must be writable.
 */
enum CollatzStatus collatz_census_bounds(uint64_t g,
                                         uint32_t k,
                                         uint64_t *out_min,
                                         uint64_t *out_max);

/**
 * The scaled stopping-time constant gamma for the repeated-random-walk
 * model of the g-map. Only the 3x+1 walk descends, so only g = 3 has a
 * stopping constant; g = 5 reports `Undefined`.
 *
 * # Safety
 * `out` must be writable.
 */
enum CollatzStatus collatz_gamma_rrw(uint64_t g, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus
