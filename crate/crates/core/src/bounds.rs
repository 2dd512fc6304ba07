//! Upper bounds for the rough moment-explosion time.
//!
//! Case A: `T_alpha^*(u) <= (alpha Gamma(alpha) T_1^*(u))^(1/alpha)`; in
//! case B the envelope time replaces `T_1^*`. Whenever the classic time is
//! at or below the time-change fixed point, the classic time itself is an
//! upper bound as well, and the refined bound takes the minimum of the two.
//! Cases C and D never explode.

use crate::heston::{t1_bar_star, t1_star, ExplosionTime};
use crate::kernels::{fixed_point_t_alpha, Kernel};
use crate::params::{CaseLabel, ModelParams};
use crate::solver::{estimate_explosion_time, ExplosionEstimate, SolverConfig};
use crate::{Error, Result};

/// Classic explosion time transformed through the inverse time-change, the
/// combined upper bound for the rough explosion time. At `alpha = 1` rough
/// and classic coincide, so the exact classic time is returned for every
/// `u`.
pub fn km_upper_bound(p: &ModelParams, u: f64) -> ExplosionTime {
    if p.is_classic() {
        return t1_star(p, u);
    }
    let classic = classic_reference(p, u);
    match classic.value() {
        None => classic,
        Some(t) => {
            let ag = libm::tgamma(p.alpha + 1.0);
            ExplosionTime::finite(classic.case(), (ag * t).powf(1.0 / p.alpha))
        }
    }
}

/// The tightest certified upper bound: the transformed bound, and
/// additionally the untransformed classic time when it does not exceed the
/// fixed point of the time-change.
pub fn km_refined_bound(p: &ModelParams, u: f64) -> ExplosionTime {
    if p.is_classic() {
        return t1_star(p, u);
    }
    let km = km_upper_bound(p, u);
    let classic = classic_reference(p, u);
    match (km.value(), classic.value()) {
        (Some(a), Some(t)) => {
            let t_alpha = fixed_point_t_alpha(p.alpha).expect("alpha validated");
            if t <= t_alpha {
                ExplosionTime::finite(km.case(), a.min(t))
            } else {
                km
            }
        }
        _ => km,
    }
}

/// `T_1^*` in case A, the envelope time in case B, infinite otherwise.
fn classic_reference(p: &ModelParams, u: f64) -> ExplosionTime {
    let t = t1_star(p, u);
    match t.case() {
        CaseLabel::B => t1_bar_star(p, u).expect("case B checked"),
        _ => t,
    }
}

use rayon::prelude::*;

/// One row of the explosion-time sweep.
#[derive(Debug, Clone)]
pub struct ExplosionSweepRow {
    pub u: f64,
    pub case: CaseLabel,
    /// `T_1^*(u)`; infinite in cases C/D.
    pub t1_star: f64,
    /// Envelope explosion time; finite only in case B.
    pub t1_bar_star: f64,
    pub km_bound: f64,
    /// Upper edge of the numeric blow-up bracket, when requested.
    pub numeric_estimate: Option<f64>,
}

/// Sweep the bounds over a grid of moment orders. With `numeric`, the
/// solver estimates each finite blow-up time; its per-point step and
/// horizon adapt to the bound (the bound certifies where blow-up must
/// happen), but never beyond `cfg.horizon`.
pub fn explosion_sweep(
    p: &ModelParams,
    u_grid: &[f64],
    numeric: Option<&SolverConfig>,
) -> Result<Vec<ExplosionSweepRow>> {
    p.validate()?;
    // grid points are independent pure computations; order is preserved
    u_grid
        .par_iter()
        .map(|&u| {
            let ts = t1_star(p, u);
            let case = ts.case();
            let tbar = match case {
                CaseLabel::B => t1_bar_star(p, u)?.as_f64(),
                _ => f64::INFINITY,
            };
            let km = km_upper_bound(p, u);
            let numeric_estimate = match numeric {
                None => None,
                Some(cfg) => Some(numeric_estimate(p, u, &km, cfg)?),
            };
            Ok(ExplosionSweepRow {
                u,
                case,
                t1_star: ts.as_f64(),
                t1_bar_star: tbar,
                km_bound: km.as_f64(),
                numeric_estimate,
            })
        })
        .collect()
}

/// CSV dump of a sweep with the columns
/// `u, case, T1_star, T1_bar_star, km_bound[, numeric_estimate]`.
pub fn explosion_sweep_csv(
    rows: &[ExplosionSweepRow],
    out: &mut impl std::io::Write,
) -> Result<()> {
    use crate::export::Cell;
    let numeric = rows.iter().any(|r| r.numeric_estimate.is_some());
    let mut headers = vec!["u", "case", "T1_star", "T1_bar_star", "km_bound"];
    if numeric {
        headers.push("numeric_estimate");
    }
    let table: Vec<Vec<Cell>> = rows
        .iter()
        .map(|r| {
            let mut cells = vec![
                Cell::Num(r.u),
                Cell::Text(r.case.as_str().into()),
                Cell::Num(r.t1_star),
                Cell::Num(r.t1_bar_star),
                Cell::Num(r.km_bound),
            ];
            if numeric {
                cells.push(Cell::Num(r.numeric_estimate.unwrap_or(f64::INFINITY)));
            }
            cells
        })
        .collect();
    crate::export::write_csv(out, &headers, &table)
}

fn numeric_estimate(
    p: &ModelParams,
    u: f64,
    km: &ExplosionTime,
    cfg: &SolverConfig,
) -> Result<f64> {
    let bound = match km.value() {
        None => return Ok(f64::INFINITY),
        Some(b) => b,
    };
    if bound * 1.01 > cfg.horizon {
        return Err(Error::HorizonTooShort { horizon: cfg.horizon });
    }
    let mut local = *cfg;
    local.step = cfg.step.max(bound / 5000.0);
    local.horizon = (bound * 1.05 + 10.0 * local.step).min(cfg.horizon);
    let kernel = Kernel::power_law(p.alpha)?;
    match estimate_explosion_time(&kernel, p, u, &local, local.step)? {
        ExplosionEstimate::Bracket { t_hi, .. } => Ok(t_hi),
        ExplosionEstimate::Infinite => Ok(f64::INFINITY),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p8() -> ModelParams {
        ModelParams::new(-0.8, 2.0, 0.2, 0.6, 0.04).unwrap()
    }

    const KM_M20: f64 = 0.404257147156245;
    const KM_60: f64 = 10.0898289081276;
    const T1_M20: f64 = 0.649968944654883;

    #[test]
    fn km_bound_values() {
        let p = p8();
        assert!((km_upper_bound(&p, -20.0).as_f64() - KM_M20).abs() < 1e-12);
        assert!((km_upper_bound(&p, 60.0).as_f64() - KM_60).abs() < 1e-10);
        assert!(!km_upper_bound(&p, 10.0).is_finite());
        assert!(!km_upper_bound(&p, 0.5).is_finite());
    }

    #[test]
    fn km_bound_collapses_at_alpha_one() {
        let p = ModelParams::new(-0.8, 2.0, 0.2, 1.0, 0.04).unwrap();
        for &u in &[-20.0, -8.0, 60.0] {
            let km = km_upper_bound(&p, u).as_f64();
            let t1 = crate::heston::t1_star(&p, u).as_f64();
            assert_eq!(km, t1, "u={u}");
            assert_eq!(km_refined_bound(&p, u).as_f64(), t1);
        }
    }

    #[test]
    fn refined_bound_takes_minimum() {
        let p = p8();
        // T1*(-20) = 0.64997 <= fixed point 1.325, so both bounds apply
        let r = km_refined_bound(&p, -20.0).as_f64();
        assert!((r - KM_M20.min(T1_M20)).abs() < 1e-12);
        assert!(!km_refined_bound(&p, 10.0).is_finite());
        // far in case A the classic time exceeds the fixed point: km only
        let deep = km_refined_bound(&p, -13.0).as_f64();
        assert!((deep - km_upper_bound(&p, -13.0).as_f64()).abs() < 1e-15);
    }

    /// The bound inherits the monotonicity pattern of the combined classic
    /// curve: increasing toward d_-, decreasing past d_+.
    #[test]
    fn km_bound_monotonicity() {
        let p = p8();
        let (dm, dp) = crate::riccati::delta_roots(&p);
        let mut prev = 0.0;
        let mut u = -40.0;
        while u < dm - 0.1 {
            let v = km_upper_bound(&p, u).as_f64();
            assert!(v > prev, "u={u}");
            prev = v;
            u += 0.25;
        }
        let mut prev = f64::INFINITY;
        let mut u = dp + 0.1;
        while u < 150.0 {
            let v = km_upper_bound(&p, u).as_f64();
            assert!(v < prev, "u={u}");
            prev = v;
            u += 0.5;
        }
    }

    /// Continuity in alpha on (1/2, 1). At alpha = 1 itself the bound
    /// switches to the exact classic time, which in case B is tighter than
    /// the envelope-based limit of the formula.
    #[test]
    fn km_bound_alpha_continuity() {
        for &u in &[-20.0, 60.0] {
            let mut prev: Option<f64> = None;
            for i in 0..=40 {
                let alpha = 0.55 + (0.9999 - 0.55) * i as f64 / 40.0;
                let p = ModelParams::new(-0.8, 2.0, 0.2, alpha, 0.04).unwrap();
                let v = km_upper_bound(&p, u).as_f64();
                if let Some(q) = prev {
                    assert!((v - q).abs() < 0.35 * (1.0 + q.abs()), "jump at alpha={alpha} u={u}");
                }
                prev = Some(v);
            }
            // case A joins the alpha = 1 value continuously
            if u < 0.0 {
                let near = km_upper_bound(
                    &ModelParams::new(-0.8, 2.0, 0.2, 0.9999, 0.04).unwrap(),
                    u,
                )
                .as_f64();
                let at_one =
                    km_upper_bound(&ModelParams::new(-0.8, 2.0, 0.2, 1.0, 0.04).unwrap(), u)
                        .as_f64();
                assert!((near - at_one).abs() < 1e-3);
            }
        }
    }

    #[test]
    fn sweep_rows_and_numeric() {
        let p = p8();
        let grid = [-20.0, -12.5, 0.5, 10.0, 60.0];
        let rows = explosion_sweep(&p, &grid, None).unwrap();
        assert_eq!(rows.len(), 5);
        assert_eq!(rows[0].case, CaseLabel::A);
        assert!(rows[0].t1_bar_star.is_infinite()); // envelope column only in case B
        assert!(rows[4].t1_bar_star.is_finite());
        assert!(rows[2].t1_star.is_infinite() && rows[2].km_bound.is_infinite());
        assert!(rows.iter().all(|r| r.numeric_estimate.is_none()));
        let mut csv = Vec::new();
        explosion_sweep_csv(&rows, &mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert_eq!(text.lines().next().unwrap(), "u,case,T1_star,T1_bar_star,km_bound");
        assert!(text.contains(",A,"));

        let cfg = SolverConfig { step: 1e-3, horizon: 2.0, ..Default::default() };
        let rows = explosion_sweep(&p, &[-20.0, 0.5], Some(&cfg)).unwrap();
        let est = rows[0].numeric_estimate.unwrap();
        assert!(est <= rows[0].km_bound * 1.02, "estimate {est} vs bound");
        assert!(rows[1].numeric_estimate.unwrap().is_infinite());
        // horizon shorter than the bound: error
        let tight = SolverConfig { step: 1e-3, horizon: 0.1, ..Default::default() };
        assert!(explosion_sweep(&p, &[-20.0], Some(&tight)).is_err());
    }
}
