#ifndef ROUGH_HESTON_H
#define ROUGH_HESTON_H

/* Generated by cbindgen from rough-heston-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes returned by every fallible call.
typedef enum RhStatus {
  RH_STATUS_OK = 0,
  RH_STATUS_INVALID_PARAMS = 1,
  RH_STATUS_DOMAIN_ERROR = 2,
  RH_STATUS_EXPLOSION = 3,
  RH_STATUS_HORIZON_TOO_SHORT = 4,
  RH_STATUS_ACCURACY_ERROR = 5,
  RH_STATUS_BRACKET_ERROR = 6,
  RH_STATUS_IO_ERROR = 7,
  RH_STATUS_PARSE_ERROR = 8,
  RH_STATUS_NULL_POINTER = 9,
} RhStatus;

// Opaque model-parameter handle.
typedef struct RhParams RhParams;

// Opaque grid-solution handle.
typedef struct RhSolution RhSolution;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Create a parameter handle; fails when an invariant is violated.
//
// # Safety
// `out` must be a valid pointer; on success it receives a handle that must
// be released with `rh_params_free`.
enum RhStatus rh_params_new(double rho,
                            double lambda,
                            double eta,
                            double alpha,
                            double v0,
                            struct RhParams **out);

// Release a parameter handle. NULL is ignored.
//
// # Safety
// `p` must come from `rh_params_new` and not have been freed already.
void rh_params_free(struct RhParams *p);

// Case label of a moment order as an ASCII character 'A'..'D'.
//
// # Safety
// `p` and `out_case` must be valid pointers.
enum RhStatus rh_classify(const struct RhParams *p, double u, char *out_case);

// # Safety
// `p` and `out` must be valid pointers.
enum RhStatus rh_eval_r(const struct RhParams *p, double u, double w, double *out);

// # Safety
// `p` and `out` must be valid pointers.
enum RhStatus rh_eval_r0(const struct RhParams *p, double u, double w, double *out);

// # Safety
// `p` and `out` must be valid pointers.
enum RhStatus rh_eval_rbar(const struct RhParams *p, double u, double w, double *out);

// # Safety
// `p` and `out` must be valid pointers.
enum RhStatus rh_discriminant(const struct RhParams *p, double u, double *out);

// Roots `d_- < d_+` of the discriminant in the moment order.
//
// # Safety
// All pointers must be valid.
enum RhStatus rh_delta_roots(const struct RhParams *p, double *out_minus, double *out_plus);

// # Safety
// `p` and `out` must be valid pointers.
enum RhStatus rh_w_min_location(const struct RhParams *p, double u, double *out);

// # Safety
// `p` and `out` must be valid pointers.
enum RhStatus rh_w_first_root(const struct RhParams *p, double u, double *out);

// Classic explosion time; infinite in cases C/D.
//
// # Safety
// `p` and `out` must be valid pointers.
enum RhStatus rh_t1_star(const struct RhParams *p, double u, double *out);

// Envelope explosion time (case B only).
//
// # Safety
// `p` and `out` must be valid pointers.
enum RhStatus rh_t1_bar_star(const struct RhParams *p, double u, double *out);

// Combined explosion-time curve for `rho < 0`.
//
// # Safety
// `p` and `out` must be valid pointers.
enum RhStatus rh_t1_tilde(const struct RhParams *p, double u, double *out);

// Classic Riccati solution `psi_1(t, u)`.
//
// # Safety
// `p` and `out` must be valid pointers.
enum RhStatus rh_psi1(const struct RhParams *p, double u, double t, double *out);

// Envelope solution (case B only).
//
// # Safety
// `p` and `out` must be valid pointers.
enum RhStatus rh_psi1_bar(const struct RhParams *p, double u, double t, double *out);

// Transformed upper bound for the rough explosion time.
//
// # Safety
// `p` and `out` must be valid pointers.
enum RhStatus rh_km_upper_bound(const struct RhParams *p, double u, double *out);

// # Safety
// `p` and `out` must be valid pointers.
enum RhStatus rh_km_refined_bound(const struct RhParams *p, double u, double *out);

// # Safety
// `p` and `out` must be valid pointers.
enum RhStatus rh_threshold_t_crit(const struct RhParams *p, double *out);

// # Safety
// `p` and `out` must be valid pointers.
enum RhStatus rh_threshold_t_crit_prime(const struct RhParams *p, double *out);

// Classic critical moment; `side`: 0 lower, 1 upper.
//
// # Safety
// `p` and `out` must be valid pointers.
enum RhStatus rh_u1_critical(const struct RhParams *p, double t, int side, double *out);

// Critical pseudo-moment; `side`: 0 lower, 1 upper.
//
// # Safety
// `p` and `out` must be valid pointers.
enum RhStatus rh_u1_pseudo(const struct RhParams *p, double t, int side, double *out);

// Certified bounds for the rough critical moments at maturity `t`.
//
// # Safety
// All pointers must be valid.
enum RhStatus rh_rough_critical_bounds(const struct RhParams *p,
                                       double t,
                                       double *out_lower,
                                       double *out_upper);

// `varsigma(y) = 2 - 4 (sqrt(y^2+y) - y)`.
//
// # Safety
// `out` must be a valid pointer.
enum RhStatus rh_lee_varsigma(double y, double *out);

// Classic wing slope; `wing`: 0 left, 1 right.
//
// # Safety
// `p` and `out` must be valid pointers.
enum RhStatus rh_aivs_classic(const struct RhParams *p, double t, int wing, double *out);

// Non-asymptotic rough left-wing lower bound, `0 < t <= T'_crit`.
//
// # Safety
// `p` and `out` must be valid pointers.
enum RhStatus rh_aivs_rough_lower_left(const struct RhParams *p, double t, double *out);

// Small-maturity asymptotic bound; `wing`: 0 left, 1 right.
//
// # Safety
// `p` and `out` must be valid pointers.
enum RhStatus rh_aivs_rough_asymptotic_bound(const struct RhParams *p,
                                             double t,
                                             int wing,
                                             double *out);

// Mittag-Leffler function `E_{a,b}(x)`.
//
// # Safety
// `out` must be a valid pointer.
enum RhStatus rh_mittag_leffler(double a, double b, double x, double *out);

// # Safety
// `out` must be a valid pointer.
enum RhStatus rh_kappa_alpha(double alpha, double t, double *out);

// # Safety
// `out` must be a valid pointer.
enum RhStatus rh_cumulative_k(double alpha, double t, double *out);

// # Safety
// `out` must be a valid pointer.
enum RhStatus rh_fixed_point_t_alpha(double alpha, double *out);

// # Safety
// `p` and `out` must be valid pointers.
enum RhStatus rh_resolvent(const struct RhParams *p, double t, double *out);

// # Safety
// `p` and `out` must be valid pointers.
enum RhStatus rh_cumulative_l(const struct RhParams *p, double t, double *out);

// # Safety
// `p` and `out` must be valid pointers.
enum RhStatus rh_fixed_point_t_alpha_lambda(const struct RhParams *p, double *out);

// Forward variance `xi(T)` under a constant mean-reversion level.
//
// # Safety
// `p` and `out` must be valid pointers.
enum RhStatus rh_forward_variance(const struct RhParams *p, double theta, double t, double *out);

// Solve the Volterra-Riccati equation with the power-law kernel of the
// handle's `alpha` on a uniform grid.
//
// # Safety
// `p` and `out` must be valid; on success the handle in `out` must be
// released with `rh_solution_free`.
enum RhStatus rh_solve_psi(const struct RhParams *p,
                           double u,
                           double step,
                           double horizon,
                           struct RhSolution **out);

// Number of grid points in a solution.
//
// # Safety
// `s` must be a valid solution handle.
size_t rh_solution_len(const struct RhSolution *s);

// Borrowed pointer to the grid times; valid until the handle is freed.
//
// # Safety
// `s` must be a valid solution handle.
const double *rh_solution_times(const struct RhSolution *s);

// Borrowed pointer to the solution values; valid until the handle is freed.
//
// # Safety
// `s` must be a valid solution handle.
const double *rh_solution_values(const struct RhSolution *s);

// Whether the solution blew up; writes the bracket when it did.
// Returns 1 on blow-up, 0 otherwise.
//
// # Safety
// All pointers must be valid.
int rh_solution_blew_up(const struct RhSolution *s, double *out_t_lo, double *out_t_hi);

// Release a solution handle. NULL is ignored.
//
// # Safety
// `s` must come from `rh_solve_psi` and not have been freed already.
void rh_solution_free(struct RhSolution *s);

// Numeric blow-up bracket for the rough explosion time, refined to
// `bracket_tol`. Cases C/D write infinity into both slots.
//
// # Safety
// All pointers must be valid.
enum RhStatus rh_estimate_explosion_time(const struct RhParams *p,
                                         double u,
                                         double step,
                                         double horizon,
                                         double bracket_tol,
                                         double *out_t_lo,
                                         double *out_t_hi);

// MGF under a flat forward variance curve.
//
// # Safety
// `p` and `out` must be valid pointers.
enum RhStatus rh_mgf_flat(const struct RhParams *p,
                          double u,
                          double t,
                          double xi_flat,
                          double step,
                          double *out);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* ROUGH_HESTON_H */
