#ifndef JCSIM_H
#define JCSIM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Stability codes written by [`jc_mb_roots`].
 */
#define JC_STABLE 0

#define JC_UNSTABLE 1

#define JC_MARGINAL 2

#define JC_UNKNOWN 3

typedef enum JcStatus {
  JC_STATUS_OK = 0,
  JC_STATUS_NULL_POINTER = 1,
  JC_STATUS_INVALID_ARGUMENT = 2,
  JC_STATUS_BUFFER_TOO_SMALL = 3,
  JC_STATUS_TRUNCATION = 4,
  JC_STATUS_SINGULAR_SYSTEM = 5,
  JC_STATUS_NOT_CONVERGED = 6,
  JC_STATUS_DIMENSION_TOO_LARGE = 7,
  JC_STATUS_SINGULAR_GAMMA_TILDE = 8,
  JC_STATUS_NUMERICAL = 9,
  JC_STATUS_IO = 10,
  JC_STATUS_PANIC = 11,
} JcStatus;

/**
 * System parameters; rates in the same unit as `kappa`.
 */
typedef struct JcParams JcParams;

/**
 * A solved steady state.
 */
typedef struct JcState JcState;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Creates a parameter handle. Fails with `INVALID_ARGUMENT` for
 * non-finite values, `kappa <= 0`, or negative `g`, `gamma`, `eps_d`.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum JcStatus jc_params_new(double g,
                            double kappa,
                            double gamma,
                            double eps_d,
                            double dwc,
                            double delta,
                            struct JcParams **out);

/**
 * # Safety
 * `params` must be null or a handle from [`jc_params_new`] not yet freed.
 */
void jc_params_free(struct JcParams *params);

/**
 * Steady state at a fixed Fock cutoff `n_max` (direct sparse solve).
 *
 * # Safety
 * `params` must be a live handle; `out` must be writable.
 */
enum JcStatus jc_steady_state(const struct JcParams *params, size_t n_max, struct JcState **out);

/**
 * Steady state with the cutoff grown until ⟨n⟩ and the Fock tail settle.
 *
 * # Safety
 * `params` must be a live handle; `out` must be writable.
 */
enum JcStatus jc_steady_state_auto(const struct JcParams *params, struct JcState **out);

/**
 * # Safety
 * `state` must be null or a handle from a steady-state call not yet freed.
 */
void jc_state_free(struct JcState *state);

/**
 * # Safety
 * `state` must be a live handle; `n_max` and `residual` must be writable.
 */
enum JcStatus jc_state_info(const struct JcState *state, size_t *n_max, double *residual);

/**
 * # Safety
 * `state` must be a live handle; `out` must be writable.
 */
enum JcStatus jc_state_photon_number(const struct JcState *state, double *out);

/**
 * ⟨σ−⟩ and the Bloch vector `(x, y, z)` written to `bloch[0..3]`.
 *
 * # Safety
 * `state` must be a live handle; `re`, `im` writable; `bloch` must point to
 * at least three doubles.
 */
enum JcStatus jc_state_qubit(const struct JcState *state, double *re, double *im, double *bloch);

/**
 * Q function of the cavity on a `points × points` grid over
 * `[-half_width, half_width]²`, row-major with y as the slow index.
 * `half_width <= 0` selects √⟨n⟩ + 5.
 *
 * # Safety
 * `state` must be a live handle; `buf` must point to `len` doubles.
 */
enum JcStatus jc_state_q_function(const struct JcState *state,
                                  double half_width,
                                  size_t points,
                                  double *buf,
                                  size_t len);

/**
 * Maxwell-Bloch fixed points. Writes up to `cap` roots (photon number,
 * field amplitude, stability code) and the total count to `count`; fails
 * with `BUFFER_TOO_SMALL` when `cap < count`, after setting `count`.
 *
 * # Safety
 * `params` must be a live handle; each array must hold `cap` elements;
 * `count` must be writable.
 */
enum JcStatus jc_mb_roots(const struct JcParams *params,
                          double *n,
                          double *re_alpha,
                          double *im_alpha,
                          int *stability,
                          size_t cap,
                          size_t *count);

/**
 * Copies the calling thread's last error message, NUL-terminated and
 * truncated to `len − 1` bytes, into `buf`. Returns the full message
 * length in bytes without the terminator; pass `len = 0` to query it.
 *
 * # Safety
 * `buf` must point to `len` writable bytes, or be null with `len = 0`.
 */
size_t jc_last_error_message(char *buf, size_t len);

/**
 * Static NUL-terminated version string.
 */
const char *jc_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* JCSIM_H */
