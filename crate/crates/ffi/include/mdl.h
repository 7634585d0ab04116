#ifndef MDL_H
#define MDL_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum MdlStatus {
  MDL_STATUS_OK = 0,
  MDL_STATUS_NULL_POINTER = 1,
  MDL_STATUS_INVALID_UTF8 = 2,
  MDL_STATUS_PARSE = 3,
  MDL_STATUS_INVALID_PARAMETER = 4,
  MDL_STATUS_STATE_CAP_EXCEEDED = 5,
  MDL_STATUS_UNSUPPORTED = 6,
  MDL_STATUS_NUMERIC = 7,
  MDL_STATUS_PANIC = 8,
} MdlStatus;

/**
 * Generator and duality matrix for one model instance.
 */
typedef struct MdlSystem MdlSystem;

typedef struct MdlEstimate {
  double mean1;
  double se1;
  double mean2;
  double se2;
  double z;
} MdlEstimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failing call on this thread, or null. Owned by the
 * library; valid until the next call on the same thread.
 */
const char *mdl_last_error(void);

/**
 * # Safety
 * `s` must be null or a string returned by this library.
 */
void mdl_string_free(char *s);

/**
 * Builds a generator and its duality function. `model` is `"msasep"`,
 * `"open"` or `"braided"`; `param` is `n`, `1` or `m` respectively. `q` and
 * `big_q` are rationals such as `"1/2"`; a null `big_q` means `Q = q`.
 *
 * # Safety
 * String arguments must be null or NUL-terminated; `out` must be writable.
 */
enum MdlStatus mdl_system_new(const char *model,
                              size_t l,
                              uint32_t param,
                              const char *q,
                              const char *big_q,
                              struct MdlSystem **out);

/**
 * # Safety
 * `sys` must be null or a handle from [`mdl_system_new`] not yet freed.
 */
void mdl_system_free(struct MdlSystem *sys);

/**
 * # Safety
 * `sys` must be a live handle and `out` writable.
 */
enum MdlStatus mdl_system_state_count(const struct MdlSystem *sys, size_t *out);

/**
 * Exact `D(eta, xi)` as a rational string. Configurations are written like
 * `"-1 -1 1 1"` or `"2,1"`.
 *
 * # Safety
 * `sys` must be a live handle, strings NUL-terminated, `out` writable. The
 * returned string must be released with [`mdl_string_free`].
 */
enum MdlStatus mdl_system_duality(const struct MdlSystem *sys,
                                  const char *eta,
                                  const char *xi,
                                  char **out);

/**
 * Same as [`mdl_system_duality`] rounded to `f64`.
 *
 * # Safety
 * As for [`mdl_system_duality`].
 */
enum MdlStatus mdl_system_duality_f64(const struct MdlSystem *sys,
                                      const char *eta,
                                      const char *xi,
                                      double *out);

/**
 * Exact check of `L D = D L^T`. `residual` may be null; otherwise it receives
 * the largest absolute entry of the residual as a string.
 *
 * # Safety
 * `sys` must be a live handle, `pass` writable, `residual` null or writable.
 */
enum MdlStatus mdl_system_check_duality(const struct MdlSystem *sys, bool *pass, char **residual);

/**
 * Monte-Carlo estimates of both sides of the duality identity at time `t`.
 *
 * # Safety
 * `sys` must be a live handle, strings NUL-terminated, `out` writable.
 */
enum MdlStatus mdl_system_simulate(const struct MdlSystem *sys,
                                   const char *x,
                                   const char *y,
                                   double t,
                                   size_t n_traj,
                                   uint64_t seed,
                                   struct MdlEstimate *out);

/**
 * Runs a verification suite with default parameters and returns the
 * reports as a JSON array. `all_pass` may be null.
 *
 * # Safety
 * `suite` must be NUL-terminated, `out` writable, `all_pass` null or
 * writable. The returned string must be released with [`mdl_string_free`].
 */
enum MdlStatus mdl_verify_suite_json(const char *suite, bool *all_pass, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MDL_H */
