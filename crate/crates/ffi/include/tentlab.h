#ifndef TENTLAB_H
#define TENTLAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum TlStatus {
  TL_STATUS_OK = 0,
  TL_STATUS_NULL_POINTER = 1,
  /**
   * Malformed number, bad backend id, bad parameters or precision.
   */
  TL_STATUS_INVALID_ARGUMENT = 2,
  /**
   * A value outside `[0, N]`.
   */
  TL_STATUS_DOMAIN = 3,
  /**
   * A value does not fit the fixed-point format.
   */
  TL_STATUS_OVERFLOW = 4,
  /**
   * The operation needs other parameters, e.g. slope 2.
   */
  TL_STATUS_UNSUPPORTED = 5,
  /**
   * Index past the end of a sequence, or no cycle was found.
   */
  TL_STATUS_OUT_OF_RANGE = 6,
  TL_STATUS_IO = 7,
  TL_STATUS_PANIC = 8,
} TlStatus;

/**
 * The result of a cycle search.
 */
typedef struct TlOrbit TlOrbit;

/**
 * A tent map bound to one arithmetic backend.
 */
typedef struct TlTentMap TlTentMap;

/**
 * A computed trajectory.
 */
typedef struct TlTrajectory TlTrajectory;

/**
 * Plain-data view of a [`TlOrbit`].
 */
typedef struct TlOrbitSummary {
  /**
   * False when the step budget ran out without a revisit.
   */
  bool found;
  uint64_t transient;
  uint64_t period;
  /**
   * -1 when no state was an integer.
   */
  int64_t first_integer_step;
  bool even_cycle;
  /**
   * States computed, including the initial one.
   */
  uint64_t states;
} TlOrbitSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static string.
 */
const char *tl_version(void);

/**
 * Message for the last failed call on this thread, or null. The pointer is
 * valid until the next call into the library on the same thread.
 */
const char *tl_last_error_message(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void tl_string_free(char *s);

/**
 * Creates a map with slope `slope` on `[0, bound]`. Numbers are decimal
 * strings or `p/q`; `backend` is `rational`, `fixed:p,q`, `fixed:q`, `f64`
 * or `f32`.
 *
 * # Safety
 * String arguments must be null or NUL-terminated; `out` must be writable.
 */
enum TlStatus tl_tent_map_new(const char *slope,
                              const char *bound,
                              const char *backend,
                              struct TlTentMap **out);

/**
 * # Safety
 * `map` must be null or come from [`tl_tent_map_new`] and not be freed.
 */
void tl_tent_map_free(struct TlTentMap *map);

/**
 * Backend id of `map`, such as `fixed:8,20`. Free with [`tl_string_free`].
 *
 * # Safety
 * `map` must be a live handle.
 */
char *tl_tent_map_backend(const struct TlTentMap *map);

/**
 * Computes `steps + 1` states from `x0`.
 *
 * # Safety
 * `map` must be a live handle, `x0` NUL-terminated, `out` writable.
 */
enum TlStatus tl_iterate(const struct TlTentMap *map,
                         const char *x0,
                         size_t steps,
                         struct TlTrajectory **out);

/**
 * # Safety
 * `t` must be null or a live trajectory handle.
 */
void tl_trajectory_free(struct TlTrajectory *t);

/**
 * Number of states; 0 for a null handle.
 *
 * # Safety
 * `t` must be null or a live trajectory handle.
 */
size_t tl_trajectory_len(const struct TlTrajectory *t);

/**
 * State `i` rounded to binary64.
 *
 * # Safety
 * `t` must be a live trajectory handle and `out` writable.
 */
enum TlStatus tl_trajectory_get_f64(const struct TlTrajectory *t, size_t i, double *out);

/**
 * Exact decimal expansion of state `i`. Free with [`tl_string_free`].
 *
 * # Safety
 * `t` must be a live trajectory handle and `out` writable.
 */
enum TlStatus tl_trajectory_get_decimal(const struct TlTrajectory *t, size_t i, char **out);

/**
 * Iterates from `x0` until a state repeats or `max_steps` steps are taken.
 * Running out of budget is not an error; check `found` in the summary.
 *
 * # Safety
 * `map` must be a live handle, `x0` NUL-terminated, `out` writable.
 */
enum TlStatus tl_detect_cycle(const struct TlTentMap *map,
                              const char *x0,
                              size_t max_steps,
                              struct TlOrbit **out);

/**
 * # Safety
 * `orbit` must be null or a live orbit handle.
 */
void tl_orbit_free(struct TlOrbit *orbit);

/**
 * # Safety
 * `orbit` must be a live orbit handle and `out` writable.
 */
enum TlStatus tl_orbit_summary(const struct TlOrbit *orbit, struct TlOrbitSummary *out);

/**
 * Cycle state `i`, `0 <= i < period`, rounded to binary64.
 *
 * # Safety
 * `orbit` must be a live orbit handle and `out` writable.
 */
enum TlStatus tl_orbit_cycle_get_f64(const struct TlOrbit *orbit, size_t i, double *out);

/**
 * JSON description of the orbit. Free with [`tl_string_free`].
 *
 * # Safety
 * `orbit` must be a live orbit handle and `out` writable.
 */
enum TlStatus tl_orbit_to_json(const struct TlOrbit *orbit, char **out);

/**
 * Truncates `x` onto the grid with `p` integer and `q` fractional bits and
 * writes its bit string, e.g. `0.0110`. Free with [`tl_string_free`].
 *
 * # Safety
 * `x` must be NUL-terminated and `out` writable.
 */
enum TlStatus tl_round_off(const char *x, uint32_t p, uint32_t q, char **out);

/**
 * Bins `len` samples into `bins` equal-width bins on `[0, bound]` and
 * reports the distance from uniform. `counts` may be null; otherwise it
 * must hold `bins` entries.
 *
 * # Safety
 * `values` must point to `len` doubles, `counts` to `bins` slots if not null.
 */
enum TlStatus tl_histogram(const double *values,
                           size_t len,
                           double bound,
                           size_t bins,
                           uint64_t *counts,
                           double *sup_norm,
                           double *chi_square);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TENTLAB_H */
