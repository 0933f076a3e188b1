#ifndef AFFINE_CS_H
#define AFFINE_CS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible function.
 */
typedef enum AcsStatus {
  ACS_STATUS_OK = 0,
  ACS_STATUS_INVALID_INPUT = 1,
  ACS_STATUS_DIVERGENT = 2,
  ACS_STATUS_NO_CONVERGENCE = 3,
  ACS_STATUS_EVALUATION = 4,
  ACS_STATUS_NULL_POINTER = 5,
  ACS_STATUS_PANIC = 6,
} AcsStatus;

/**
 * Opaque coherent state |q,p;nu,n>.
 */
typedef struct AcsCoherentState AcsCoherentState;

typedef struct AcsComplex {
  double re;
  double im;
} AcsComplex;

/**
 * The SU(1,1) matrix [[alpha, beta], [conj(beta), conj(alpha)]].
 */
typedef struct AcsSu11 {
  struct AcsComplex alpha;
  struct AcsComplex beta;
} AcsSu11;

typedef struct AcsCartan {
  double theta;
  struct AcsComplex zeta;
  double delta;
  struct AcsComplex xi_c;
} AcsCartan;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *acs_version(void);

/**
 * Copies the last error message of this thread into `buf` (NUL-terminated,
 * truncated to `len`). Returns the full message length without the NUL, or 0
 * when the last call succeeded.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t acs_last_error_message(char *buf, size_t len);

/**
 * Fiducial scale xi_{nu,n}.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum AcsStatus acs_xi_star(double nu, uint32_t n, double *out);

/**
 * Normalization c0 of the frame measure.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum AcsStatus acs_c0(double nu, uint32_t n, double *out);

/**
 * Creates the coherent state |q,p;nu,n>.
 *
 * # Safety
 * `out` must be a valid pointer. The handle is released with [`acs_cs_free`].
 */
enum AcsStatus acs_cs_new(double q, double p, double nu, uint32_t n, struct AcsCoherentState **out);

/**
 * Releases a handle from [`acs_cs_new`]. Null is ignored.
 *
 * # Safety
 * `h` must come from [`acs_cs_new`] and not be used afterwards.
 */
void acs_cs_free(struct AcsCoherentState *h);

/**
 * Wavefunction value at x > 0.
 *
 * # Safety
 * `h` must be a live handle and `out` a valid pointer.
 */
enum AcsStatus acs_cs_wavefunction(const struct AcsCoherentState *h,
                                   double x,
                                   struct AcsComplex *out);

/**
 * Closed-form energy expectation.
 *
 * # Safety
 * `h` must be a live handle and `out` a valid pointer.
 */
enum AcsStatus acs_cs_expectation_h(const struct AcsCoherentState *h, double *out);

/**
 * Overlap <a|b>.
 *
 * # Safety
 * Both handles must be live and `out` a valid pointer.
 */
enum AcsStatus acs_cs_overlap(const struct AcsCoherentState *a,
                              const struct AcsCoherentState *b,
                              struct AcsComplex *out);

/**
 * Husimi density of `h` at (q, p), analysed with the n = 0 states of index nu.
 *
 * # Safety
 * `h` must be a live handle and `out` a valid pointer.
 */
enum AcsStatus acs_husimi_density(double nu,
                                  double q,
                                  double p,
                                  const struct AcsCoherentState *h,
                                  double *out);

/**
 * Semiclassical flow of (q, p) over time t.
 *
 * # Safety
 * `q_out` and `p_out` must be valid pointers.
 */
enum AcsStatus acs_flow(double nu,
                        uint32_t n,
                        double q,
                        double p,
                        double t,
                        double *q_out,
                        double *p_out);

/**
 * F(t) = <q_t,p_t|exp(-iHt)|q0,p0> in a basis of `size` functions.
 * `delta` receives |F_N - F_2N|; pass null to skip it.
 *
 * # Safety
 * `out` must be a valid pointer; `delta` may be null.
 */
enum AcsStatus acs_fidelity(double nu,
                            uint32_t n,
                            double q0,
                            double p0,
                            double t,
                            uint32_t size,
                            struct AcsComplex *out,
                            double *delta);

/**
 * SU(1,1) image of the affine group element (q, p).
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum AcsStatus acs_su11_matrix(double q, double p, struct AcsSu11 *out);

/**
 * Cartan factors of the image of (q, p): left (`right` = 0) or right (`right` != 0).
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum AcsStatus acs_su11_cartan(double q, double p, int32_t right, struct AcsCartan *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* AFFINE_CS_H */
