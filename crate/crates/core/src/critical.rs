//! Critical moments, pseudo-moments and their rough-model bounds.
//!
//! For `rho < 0` the classic explosion time is strictly increasing on
//! `(-inf, d_-)` and strictly decreasing on `(d_+, inf)`; its branch
//! inverses are the critical moments `u_1^-(t) < 0` and `u_1^+(t) > 1`.
//! The envelope time has analogous inverses (critical pseudo-moments),
//! with the lower branch only defined past
//! `T_crit = |rho| pi / sqrt(lambda (lambda - rho eta))`.

use crate::heston::{t1_bar_star, t1_star};
use crate::kernels::{cumulative_k, fixed_point_t_alpha, Kernel};
use crate::params::ModelParams;
use crate::riccati::delta_roots;
use crate::roots::bisect_monotone;
use crate::solver::{estimate_explosion_time, ExplosionEstimate, SolverConfig};
use crate::{Error, Result};

/// Which critical moment: the lower (negative) or upper (above one) branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Lower,
    Upper,
}

const RESIDUAL_TOL: f64 = 1e-9;

fn require_negative_rho(p: &ModelParams) -> Result<()> {
    if p.rho >= 0.0 {
        return Err(Error::Domain("critical moments require rho < 0".into()));
    }
    Ok(())
}

fn require_positive_t(t: f64) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("maturity t = {t} must be positive")));
    }
    Ok(())
}

/// Classic critical moment `u_1^{-/+}(t)`: the unique `u < d_-` (lower) or
/// `u > d_+` (upper) with `T_1^*(u) = t`, to 1e-9 residual.
pub fn u1_critical(p: &ModelParams, t: f64, side: Side) -> Result<f64> {
    require_negative_rho(p)?;
    require_positive_t(t)?;
    let (dm, dp) = delta_roots(p);
    let f = |u: f64| t1_star(p, u).as_f64();
    match side {
        Side::Lower => {
            let hi = dm - 1e-12 * dm.abs().max(1.0);
            let lo = expand_down(&f, hi.min(2.0 * dm), t)?;
            bisect_monotone(f, lo, hi, t, RESIDUAL_TOL)
        }
        Side::Upper => {
            let lo = dp + 1e-12 * dp.abs().max(1.0);
            let hi = expand_up(&f, (2.0 * dp).max(dp + 1.0), t)?;
            bisect_monotone(f, lo, hi, t, RESIDUAL_TOL)
        }
    }
}

/// Critical pseudo-moment: the branch inverse of the envelope time on
/// `(lambda/(rho eta), d_-)` (lower; defined for `t > T_crit` only) or
/// `(d_+, inf)` (upper).
pub fn u1_pseudo(p: &ModelParams, t: f64, side: Side) -> Result<f64> {
    require_negative_rho(p)?;
    require_positive_t(t)?;
    let (dm, dp) = delta_roots(p);
    let f = |u: f64| t1_bar_star(p, u).map(|e| e.as_f64()).unwrap_or(f64::NAN);
    match side {
        Side::Lower => {
            let tcrit = threshold_t_crit(p)?;
            if t <= tcrit {
                return Err(Error::Domain(format!(
                    "lower pseudo-moment undefined for t = {t} <= T_crit = {tcrit}"
                )));
            }
            let boundary = p.lambda / (p.rho * p.eta);
            let pad = 1e-12 * boundary.abs().max(1.0);
            bisect_monotone(f, boundary + pad, dm - pad, t, RESIDUAL_TOL)
        }
        Side::Upper => {
            let lo = dp + 1e-12 * dp.abs().max(1.0);
            let hi = expand_up(&f, (2.0 * dp).max(dp + 1.0), t)?;
            bisect_monotone(f, lo, hi, t, RESIDUAL_TOL)
        }
    }
}

fn expand_down(f: &impl Fn(f64) -> f64, start: f64, t: f64) -> Result<f64> {
    let mut lo = start.min(-1.0);
    for _ in 0..80 {
        if f(lo) < t {
            return Ok(lo);
        }
        lo *= 2.0;
    }
    Err(Error::Bracket(format!("no lower bracket for t = {t}")))
}

fn expand_up(f: &impl Fn(f64) -> f64, start: f64, t: f64) -> Result<f64> {
    let mut hi = start.max(2.0);
    for _ in 0..80 {
        if f(hi) < t {
            return Ok(hi);
        }
        hi *= 2.0;
    }
    Err(Error::Bracket(format!("no upper bracket for t = {t}")))
}

/// `T_crit = |rho| pi / sqrt(lambda (lambda - rho eta))`, the envelope time
/// at the case-A/B boundary `u = lambda/(rho eta)`.
pub fn threshold_t_crit(p: &ModelParams) -> Result<f64> {
    require_negative_rho(p)?;
    Ok(p.rho.abs() * std::f64::consts::PI / (p.lambda * (p.lambda - p.rho * p.eta)).sqrt())
}

/// `T'_crit = (alpha Gamma(alpha) T_crit)^(1/alpha)`, the maturity below
/// which the rough lower critical moment is controlled by the classic one.
pub fn threshold_t_crit_prime(p: &ModelParams) -> Result<f64> {
    let tcrit = threshold_t_crit(p)?;
    Ok((libm::tgamma(p.alpha + 1.0) * tcrit).powf(1.0 / p.alpha))
}

/// Bounds for the rough critical moments at maturity `t`:
/// a lower bound for `u_alpha^-(t)` and an upper bound for `u_alpha^+(t)`.
///
/// The bounds evaluate the classic (pseudo-)moments at the time-changed
/// argument `K_alpha(t)`; for `t` up to the fixed point of the time-change
/// the same bounds hold with argument `t` itself and the tighter value is
/// returned.
pub fn rough_critical_bounds(p: &ModelParams, t: f64) -> Result<(f64, f64)> {
    require_negative_rho(p)?;
    require_positive_t(t)?;
    let tcrit = threshold_t_crit(p)?;
    let karg = cumulative_k(p.alpha, t)?;
    let lower_at = |arg: f64| -> Result<f64> {
        if arg <= tcrit {
            u1_critical(p, arg, Side::Lower)
        } else {
            u1_pseudo(p, arg, Side::Lower)
        }
    };
    let mut lower = lower_at(karg)?;
    let mut upper = u1_pseudo(p, karg, Side::Upper)?;
    let t_alpha = fixed_point_t_alpha(p.alpha)?;
    if t <= t_alpha {
        lower = lower.max(lower_at(t)?);
        upper = upper.min(u1_pseudo(p, t, Side::Upper)?);
    }
    Ok((lower, upper))
}

/// Numeric rough critical moment: bisection over `u` on the monotone branch
/// until the solver's blow-up estimate matches the maturity within `tol`.
/// Used for figure overlays; the certified bounds come from
/// [`rough_critical_bounds`].
pub fn rough_critical_numeric(p: &ModelParams, t: f64, side: Side, tol: f64) -> Result<f64> {
    require_negative_rho(p)?;
    require_positive_t(t)?;
    if !(tol > 0.0) {
        return Err(Error::InvalidParams(format!("tol = {tol} must be positive")));
    }
    let kernel = Kernel::power_law(p.alpha)?;
    let cfg = SolverConfig {
        step: (t / 400.0).min(tol / 4.0).max(1e-5),
        horizon: 4.0 * t + 1.0,
        ..Default::default()
    };
    let that = |u: f64| -> Result<f64> {
        match estimate_explosion_time(&kernel, p, u, &cfg, tol / 4.0) {
            Ok(ExplosionEstimate::Bracket { t_lo, t_hi }) => Ok(0.5 * (t_lo + t_hi)),
            Ok(ExplosionEstimate::Infinite) => Ok(f64::INFINITY),
            // no blow-up before the horizon: certainly later than t
            Err(Error::HorizonTooShort { .. }) => Ok(f64::INFINITY),
            Err(e) => Err(e),
        }
    };
    let (dm, dp) = delta_roots(p);
    // expand u-bracket on the monotone side, then bisect on the estimate
    let (mut lo, mut hi);
    match side {
        Side::Lower => {
            hi = dm - 0.25;
            while that(hi)? < t {
                hi = dm - 0.5 * (dm - hi); // move closer to d_-
                if dm - hi < 1e-6 {
                    return Err(Error::Bracket(format!("t = {t} too large for the lower branch")));
                }
            }
            lo = (2.0 * dm).min(-1.0);
            while that(lo)? > t {
                lo *= 2.0;
                if lo < -1e7 {
                    return Err(Error::Bracket(format!("t = {t} too small for the lower branch")));
                }
            }
        }
        Side::Upper => {
            lo = dp + 0.25;
            while that(lo)? < t {
                lo = dp + 0.5 * (lo - dp);
                if lo - dp < 1e-6 {
                    return Err(Error::Bracket(format!("t = {t} too large for the upper branch")));
                }
            }
            hi = (2.0 * dp).max(dp + 1.0);
            while that(hi)? > t {
                hi *= 2.0;
                if hi > 1e7 {
                    return Err(Error::Bracket(format!("t = {t} too small for the upper branch")));
                }
            }
        }
    }
    let increasing = matches!(side, Side::Lower);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        let est = that(mid)?;
        if (est - t).abs() <= tol {
            return Ok(mid);
        }
        if (est < t) == increasing {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// One row of the critical-moment sweep.
#[derive(Debug, Clone)]
pub struct CriticalSweepRow {
    pub t: f64,
    pub u1_minus: f64,
    /// Lower pseudo-moment; `inf` marks maturities at or below `T_crit`
    /// where it is undefined.
    pub u1bar_minus: f64,
    pub u1bar_plus: f64,
    pub rough_lower_bound: f64,
    pub rough_upper_bound: f64,
    pub numeric_rough_minus: Option<f64>,
}

/// Sweep critical moments and rough bounds over maturities. With
/// `numeric_tol`, also locate the numeric rough lower critical moment.
pub fn critical_sweep(
    p: &ModelParams,
    t_grid: &[f64],
    numeric_tol: Option<f64>,
) -> Result<Vec<CriticalSweepRow>> {
    let tcrit = threshold_t_crit(p)?;
    let mut rows = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let (lo, hi) = rough_critical_bounds(p, t)?;
        rows.push(CriticalSweepRow {
            t,
            u1_minus: u1_critical(p, t, Side::Lower)?,
            u1bar_minus: if t > tcrit {
                u1_pseudo(p, t, Side::Lower)?
            } else {
                f64::INFINITY
            },
            u1bar_plus: u1_pseudo(p, t, Side::Upper)?,
            rough_lower_bound: lo,
            rough_upper_bound: hi,
            numeric_rough_minus: match numeric_tol {
                None => None,
                Some(tol) => Some(rough_critical_numeric(p, t, Side::Lower, tol)?),
            },
        });
    }
    Ok(rows)
}

/// CSV dump of a sweep with the columns `t, u1_minus, u1bar_minus,
/// u1bar_plus, rough_lower_bound, rough_upper_bound[, numeric_rough_minus]`.
/// Undefined pseudo-moment entries (maturities at or below `T_crit`) are
/// written as `inf`.
pub fn critical_sweep_csv(rows: &[CriticalSweepRow], out: &mut impl std::io::Write) -> Result<()> {
    use crate::export::Cell;
    let numeric = rows.iter().any(|r| r.numeric_rough_minus.is_some());
    let mut headers =
        vec!["t", "u1_minus", "u1bar_minus", "u1bar_plus", "rough_lower_bound", "rough_upper_bound"];
    if numeric {
        headers.push("numeric_rough_minus");
    }
    let table: Vec<Vec<Cell>> = rows
        .iter()
        .map(|r| {
            let mut cells = vec![
                Cell::Num(r.t),
                Cell::Num(r.u1_minus),
                Cell::Num(r.u1bar_minus),
                Cell::Num(r.u1bar_plus),
                Cell::Num(r.rough_lower_bound),
                Cell::Num(r.rough_upper_bound),
            ];
            if numeric {
                cells.push(Cell::Num(r.numeric_rough_minus.unwrap_or(f64::INFINITY)));
            }
            cells
        })
        .collect();
    crate::export::write_csv(out, &headers, &table)
}
