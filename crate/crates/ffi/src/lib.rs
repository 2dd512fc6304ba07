//! C ABI for the rough-heston library.
//!
//! Conventions: handles are opaque pointers created and released by this
//! library (`rh_params_new`/`rh_params_free`, `rh_solve_psi`/
//! `rh_solution_free`); every fallible call returns an [`RhStatus`] and
//! writes its result through out-pointers; infinite explosion times are
//! reported as IEEE infinity. The generated header lives at
//! `include/rough_heston.h`.

use std::os::raw::{c_char, c_double, c_int};

use rough_heston::bounds::{km_refined_bound, km_upper_bound};
use rough_heston::critical::{
    rough_critical_bounds, threshold_t_crit, threshold_t_crit_prime, u1_critical, u1_pseudo, Side,
};
use rough_heston::heston::{psi1, psi1_bar, t1_bar_star, t1_star, t1_tilde};
use rough_heston::implied_vol::{
    aivs_classic, aivs_rough_asymptotic_bound, aivs_rough_lower_left, lee_varsigma, Wing,
};
use rough_heston::kernels::{
    cumulative_k, cumulative_l, fixed_point_t_alpha, fixed_point_t_alpha_lambda, kappa_alpha,
    mittag_leffler, resolvent, Kernel,
};
use rough_heston::riccati::{
    classify, delta_roots, discriminant, eval_r, eval_r0, eval_rbar, w_first_root, w_min_location,
};
use rough_heston::solver::{
    estimate_explosion_time, forward_variance, mgf, solve_psi, ExplosionEstimate, PsiSolution,
    SolverConfig, VarianceCurve,
};
use rough_heston::{Error, ModelParams};

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RhStatus {
    Ok = 0,
    InvalidParams = 1,
    DomainError = 2,
    Explosion = 3,
    HorizonTooShort = 4,
    AccuracyError = 5,
    BracketError = 6,
    IoError = 7,
    ParseError = 8,
    NullPointer = 9,
}

fn status_of(e: &Error) -> RhStatus {
    match e {
        Error::InvalidParams(_) => RhStatus::InvalidParams,
        Error::Domain(_) => RhStatus::DomainError,
        Error::Explosion { .. } => RhStatus::Explosion,
        Error::HorizonTooShort { .. } => RhStatus::HorizonTooShort,
        Error::Accuracy(_) => RhStatus::AccuracyError,
        Error::Bracket(_) => RhStatus::BracketError,
        Error::Io(_) => RhStatus::IoError,
        Error::Parse(_) => RhStatus::ParseError,
    }
}

/// Opaque model-parameter handle.
pub struct RhParams(ModelParams);

/// Opaque grid-solution handle.
pub struct RhSolution(PsiSolution);

macro_rules! nonnull {
    ($ptr:expr) => {
        match unsafe { $ptr.as_ref() } {
            Some(r) => r,
            None => return RhStatus::NullPointer,
        }
    };
}

macro_rules! out_write {
    ($out:expr, $value:expr) => {
        match unsafe { $out.as_mut() } {
            Some(slot) => *slot = $value,
            None => return RhStatus::NullPointer,
        }
    };
}

fn write_result(out: *mut c_double, r: Result<f64, Error>) -> RhStatus {
    match r {
        Ok(v) => {
            out_write!(out, v);
            RhStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Create a parameter handle; fails when an invariant is violated.
///
/// # Safety
/// `out` must be a valid pointer; on success it receives a handle that must
/// be released with `rh_params_free`.
#[no_mangle]
pub unsafe extern "C" fn rh_params_new(
    rho: c_double,
    lambda: c_double,
    eta: c_double,
    alpha: c_double,
    v0: c_double,
    out: *mut *mut RhParams,
) -> RhStatus {
    match ModelParams::new(rho, lambda, eta, alpha, v0) {
        Ok(p) => {
            out_write!(out, Box::into_raw(Box::new(RhParams(p))));
            RhStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Release a parameter handle. NULL is ignored.
///
/// # Safety
/// `p` must come from `rh_params_new` and not have been freed already.
#[no_mangle]
pub unsafe extern "C" fn rh_params_free(p: *mut RhParams) {
    if !p.is_null() {
        drop(unsafe { Box::from_raw(p) });
    }
}

/// Case label of a moment order as an ASCII character 'A'..'D'.
///
/// # Safety
/// `p` and `out_case` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn rh_classify(
    p: *const RhParams,
    u: c_double,
    out_case: *mut c_char,
) -> RhStatus {
    let p = nonnull!(p);
    out_write!(out_case, classify(&p.0, u).as_str().as_bytes()[0] as c_char);
    RhStatus::Ok
}

/// # Safety
/// `p` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn rh_eval_r(
    p: *const RhParams,
    u: c_double,
    w: c_double,
    out: *mut c_double,
) -> RhStatus {
    let p = nonnull!(p);
    out_write!(out, eval_r(&p.0, u, w));
    RhStatus::Ok
}

/// # Safety
/// `p` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn rh_eval_r0(
    p: *const RhParams,
    u: c_double,
    w: c_double,
    out: *mut c_double,
) -> RhStatus {
    let p = nonnull!(p);
    out_write!(out, eval_r0(&p.0, u, w));
    RhStatus::Ok
}

/// # Safety
/// `p` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn rh_eval_rbar(
    p: *const RhParams,
    u: c_double,
    w: c_double,
    out: *mut c_double,
) -> RhStatus {
    let p = nonnull!(p);
    out_write!(out, eval_rbar(&p.0, u, w));
    RhStatus::Ok
}

/// # Safety
/// `p` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn rh_discriminant(
    p: *const RhParams,
    u: c_double,
    out: *mut c_double,
) -> RhStatus {
    let p = nonnull!(p);
    out_write!(out, discriminant(&p.0, u));
    RhStatus::Ok
}

/// Roots `d_- < d_+` of the discriminant in the moment order.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn rh_delta_roots(
    p: *const RhParams,
    out_minus: *mut c_double,
    out_plus: *mut c_double,
) -> RhStatus {
    let p = nonnull!(p);
    let (dm, dp) = delta_roots(&p.0);
    out_write!(out_minus, dm);
    out_write!(out_plus, dp);
    RhStatus::Ok
}

/// # Safety
/// `p` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn rh_w_min_location(
    p: *const RhParams,
    u: c_double,
    out: *mut c_double,
) -> RhStatus {
    let p = nonnull!(p);
    out_write!(out, w_min_location(&p.0, u));
    RhStatus::Ok
}

/// # Safety
/// `p` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn rh_w_first_root(
    p: *const RhParams,
    u: c_double,
    out: *mut c_double,
) -> RhStatus {
    let p = nonnull!(p);
    write_result(out, w_first_root(&p.0, u))
}

/// Classic explosion time; infinite in cases C/D.
///
/// # Safety
/// `p` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn rh_t1_star(
    p: *const RhParams,
    u: c_double,
    out: *mut c_double,
) -> RhStatus {
    let p = nonnull!(p);
    out_write!(out, t1_star(&p.0, u).as_f64());
    RhStatus::Ok
}

/// Envelope explosion time (case B only).
///
/// # Safety
/// `p` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn rh_t1_bar_star(
    p: *const RhParams,
    u: c_double,
    out: *mut c_double,
) -> RhStatus {
    let p = nonnull!(p);
    write_result(out, t1_bar_star(&p.0, u).map(|e| e.as_f64()))
}

/// Combined explosion-time curve for `rho < 0`.
///
/// # Safety
/// `p` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn rh_t1_tilde(
    p: *const RhParams,
    u: c_double,
    out: *mut c_double,
) -> RhStatus {
    let p = nonnull!(p);
    write_result(out, t1_tilde(&p.0, u).map(|e| e.as_f64()))
}

/// Classic Riccati solution `psi_1(t, u)`.
///
/// # Safety
/// `p` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn rh_psi1(
    p: *const RhParams,
    u: c_double,
    t: c_double,
    out: *mut c_double,
) -> RhStatus {
    let p = nonnull!(p);
    write_result(out, psi1(&p.0, u, t))
}

/// Envelope solution (case B only).
///
/// # Safety
/// `p` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn rh_psi1_bar(
    p: *const RhParams,
    u: c_double,
    t: c_double,
    out: *mut c_double,
) -> RhStatus {
    let p = nonnull!(p);
    write_result(out, psi1_bar(&p.0, u, t))
}

/// Transformed upper bound for the rough explosion time.
///
/// # Safety
/// `p` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn rh_km_upper_bound(
    p: *const RhParams,
    u: c_double,
    out: *mut c_double,
) -> RhStatus {
    let p = nonnull!(p);
    out_write!(out, km_upper_bound(&p.0, u).as_f64());
    RhStatus::Ok
}

/// # Safety
/// `p` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn rh_km_refined_bound(
    p: *const RhParams,
    u: c_double,
    out: *mut c_double,
) -> RhStatus {
    let p = nonnull!(p);
    out_write!(out, km_refined_bound(&p.0, u).as_f64());
    RhStatus::Ok
}

/// # Safety
/// `p` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn rh_threshold_t_crit(
    p: *const RhParams,
    out: *mut c_double,
) -> RhStatus {
    let p = nonnull!(p);
    write_result(out, threshold_t_crit(&p.0))
}

/// # Safety
/// `p` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn rh_threshold_t_crit_prime(
    p: *const RhParams,
    out: *mut c_double,
) -> RhStatus {
    let p = nonnull!(p);
    write_result(out, threshold_t_crit_prime(&p.0))
}

fn side_of(side: c_int) -> Result<Side, Error> {
    match side {
        0 => Ok(Side::Lower),
        1 => Ok(Side::Upper),
        other => Err(Error::InvalidParams(format!("side = {other}, expected 0 or 1"))),
    }
}

fn wing_of(wing: c_int) -> Result<Wing, Error> {
    match wing {
        0 => Ok(Wing::Left),
        1 => Ok(Wing::Right),
        other => Err(Error::InvalidParams(format!("wing = {other}, expected 0 or 1"))),
    }
}

/// Classic critical moment; `side`: 0 lower, 1 upper.
///
/// # Safety
/// `p` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn rh_u1_critical(
    p: *const RhParams,
    t: c_double,
    side: c_int,
    out: *mut c_double,
) -> RhStatus {
    let p = nonnull!(p);
    write_result(out, side_of(side).and_then(|s| u1_critical(&p.0, t, s)))
}

/// Critical pseudo-moment; `side`: 0 lower, 1 upper.
///
/// # Safety
/// `p` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn rh_u1_pseudo(
    p: *const RhParams,
    t: c_double,
    side: c_int,
    out: *mut c_double,
) -> RhStatus {
    let p = nonnull!(p);
    write_result(out, side_of(side).and_then(|s| u1_pseudo(&p.0, t, s)))
}

/// Certified bounds for the rough critical moments at maturity `t`.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn rh_rough_critical_bounds(
    p: *const RhParams,
    t: c_double,
    out_lower: *mut c_double,
    out_upper: *mut c_double,
) -> RhStatus {
    let p = nonnull!(p);
    match rough_critical_bounds(&p.0, t) {
        Ok((lo, hi)) => {
            out_write!(out_lower, lo);
            out_write!(out_upper, hi);
            RhStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// `varsigma(y) = 2 - 4 (sqrt(y^2+y) - y)`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rh_lee_varsigma(y: c_double, out: *mut c_double) -> RhStatus {
    write_result(out, lee_varsigma(y))
}

/// Classic wing slope; `wing`: 0 left, 1 right.
///
/// # Safety
/// `p` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn rh_aivs_classic(
    p: *const RhParams,
    t: c_double,
    wing: c_int,
    out: *mut c_double,
) -> RhStatus {
    let p = nonnull!(p);
    write_result(out, wing_of(wing).and_then(|w| aivs_classic(&p.0, t, w)))
}

/// Non-asymptotic rough left-wing lower bound, `0 < t <= T'_crit`.
///
/// # Safety
/// `p` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn rh_aivs_rough_lower_left(
    p: *const RhParams,
    t: c_double,
    out: *mut c_double,
) -> RhStatus {
    let p = nonnull!(p);
    write_result(out, aivs_rough_lower_left(&p.0, t))
}

/// Small-maturity asymptotic bound; `wing`: 0 left, 1 right.
///
/// # Safety
/// `p` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn rh_aivs_rough_asymptotic_bound(
    p: *const RhParams,
    t: c_double,
    wing: c_int,
    out: *mut c_double,
) -> RhStatus {
    let p = nonnull!(p);
    write_result(out, wing_of(wing).and_then(|w| aivs_rough_asymptotic_bound(&p.0, t, w)))
}

/// Mittag-Leffler function `E_{a,b}(x)`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rh_mittag_leffler(
    a: c_double,
    b: c_double,
    x: c_double,
    out: *mut c_double,
) -> RhStatus {
    write_result(out, mittag_leffler(a, b, x))
}

/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rh_kappa_alpha(
    alpha: c_double,
    t: c_double,
    out: *mut c_double,
) -> RhStatus {
    write_result(out, kappa_alpha(alpha, t))
}

/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rh_cumulative_k(
    alpha: c_double,
    t: c_double,
    out: *mut c_double,
) -> RhStatus {
    write_result(out, cumulative_k(alpha, t))
}

/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rh_fixed_point_t_alpha(alpha: c_double, out: *mut c_double) -> RhStatus {
    write_result(out, fixed_point_t_alpha(alpha))
}

/// # Safety
/// `p` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn rh_resolvent(
    p: *const RhParams,
    t: c_double,
    out: *mut c_double,
) -> RhStatus {
    let p = nonnull!(p);
    write_result(out, resolvent(&p.0, t))
}

/// # Safety
/// `p` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn rh_cumulative_l(
    p: *const RhParams,
    t: c_double,
    out: *mut c_double,
) -> RhStatus {
    let p = nonnull!(p);
    write_result(out, cumulative_l(&p.0, t))
}

/// # Safety
/// `p` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn rh_fixed_point_t_alpha_lambda(
    p: *const RhParams,
    out: *mut c_double,
) -> RhStatus {
    let p = nonnull!(p);
    write_result(out, fixed_point_t_alpha_lambda(&p.0))
}

/// Forward variance `xi(T)` under a constant mean-reversion level.
///
/// # Safety
/// `p` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn rh_forward_variance(
    p: *const RhParams,
    theta: c_double,
    t: c_double,
    out: *mut c_double,
) -> RhStatus {
    let p = nonnull!(p);
    write_result(out, forward_variance(&p.0, theta, t))
}

/// Solve the Volterra-Riccati equation with the power-law kernel of the
/// handle's `alpha` on a uniform grid.
///
/// # Safety
/// `p` and `out` must be valid; on success the handle in `out` must be
/// released with `rh_solution_free`.
#[no_mangle]
pub unsafe extern "C" fn rh_solve_psi(
    p: *const RhParams,
    u: c_double,
    step: c_double,
    horizon: c_double,
    out: *mut *mut RhSolution,
) -> RhStatus {
    let p = nonnull!(p);
    let cfg = SolverConfig { step, horizon, ..SolverConfig::default() };
    let kernel = match Kernel::power_law(p.0.alpha) {
        Ok(k) => k,
        Err(e) => return status_of(&e),
    };
    match solve_psi(&kernel, &p.0, u, &cfg) {
        Ok(sol) => {
            out_write!(out, Box::into_raw(Box::new(RhSolution(sol))));
            RhStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Number of grid points in a solution.
///
/// # Safety
/// `s` must be a valid solution handle.
#[no_mangle]
pub unsafe extern "C" fn rh_solution_len(s: *const RhSolution) -> usize {
    unsafe { s.as_ref() }.map_or(0, |s| s.0.values.len())
}

/// Borrowed pointer to the grid times; valid until the handle is freed.
///
/// # Safety
/// `s` must be a valid solution handle.
#[no_mangle]
pub unsafe extern "C" fn rh_solution_times(s: *const RhSolution) -> *const c_double {
    unsafe { s.as_ref() }.map_or(std::ptr::null(), |s| s.0.times.as_ptr())
}

/// Borrowed pointer to the solution values; valid until the handle is freed.
///
/// # Safety
/// `s` must be a valid solution handle.
#[no_mangle]
pub unsafe extern "C" fn rh_solution_values(s: *const RhSolution) -> *const c_double {
    unsafe { s.as_ref() }.map_or(std::ptr::null(), |s| s.0.values.as_ptr())
}

/// Whether the solution blew up; writes the bracket when it did.
/// Returns 1 on blow-up, 0 otherwise.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn rh_solution_blew_up(
    s: *const RhSolution,
    out_t_lo: *mut c_double,
    out_t_hi: *mut c_double,
) -> c_int {
    match unsafe { s.as_ref() }.and_then(|s| s.0.blew_up()) {
        Some((lo, hi)) => {
            if let Some(slot) = unsafe { out_t_lo.as_mut() } {
                *slot = lo;
            }
            if let Some(slot) = unsafe { out_t_hi.as_mut() } {
                *slot = hi;
            }
            1
        }
        None => 0,
    }
}

/// Release a solution handle. NULL is ignored.
///
/// # Safety
/// `s` must come from `rh_solve_psi` and not have been freed already.
#[no_mangle]
pub unsafe extern "C" fn rh_solution_free(s: *mut RhSolution) {
    if !s.is_null() {
        drop(unsafe { Box::from_raw(s) });
    }
}

/// Numeric blow-up bracket for the rough explosion time, refined to
/// `bracket_tol`. Cases C/D write infinity into both slots.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn rh_estimate_explosion_time(
    p: *const RhParams,
    u: c_double,
    step: c_double,
    horizon: c_double,
    bracket_tol: c_double,
    out_t_lo: *mut c_double,
    out_t_hi: *mut c_double,
) -> RhStatus {
    let p = nonnull!(p);
    let cfg = SolverConfig { step, horizon, ..SolverConfig::default() };
    let kernel = match Kernel::power_law(p.0.alpha) {
        Ok(k) => k,
        Err(e) => return status_of(&e),
    };
    match estimate_explosion_time(&kernel, &p.0, u, &cfg, bracket_tol) {
        Ok(ExplosionEstimate::Bracket { t_lo, t_hi }) => {
            out_write!(out_t_lo, t_lo);
            out_write!(out_t_hi, t_hi);
            RhStatus::Ok
        }
        Ok(ExplosionEstimate::Infinite) => {
            out_write!(out_t_lo, f64::INFINITY);
            out_write!(out_t_hi, f64::INFINITY);
            RhStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// MGF under a flat forward variance curve.
///
/// # Safety
/// `p` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn rh_mgf_flat(
    p: *const RhParams,
    u: c_double,
    t: c_double,
    xi_flat: c_double,
    step: c_double,
    out: *mut c_double,
) -> RhStatus {
    let p = nonnull!(p);
    let cfg = SolverConfig { step, horizon: t.max(4.0 * step), ..SolverConfig::default() };
    let r = VarianceCurve::flat(xi_flat).and_then(|xi| mgf(&p.0, u, t, &xi, &cfg));
    write_result(out, r)
}
