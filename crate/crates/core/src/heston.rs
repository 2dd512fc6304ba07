//! Closed-form classic-Heston (`alpha = 1`) quantities.
//!
//! Everything here derives from the primitive of `1/R(u,.)`:
//! `Q(u,w) = int_0^w dz / R(u,z)`. The Riccati solution satisfies
//! `Q(u, psi_1(t,u)) = t`, explosion times are range limits of `Q`, and the
//! envelope solution `psibar_1` follows the increasing lower envelope of
//! `R` (linear while below the vertex, then the arctan branch).

use crate::params::{CaseLabel, ModelParams};
use crate::riccati::{
    classify, coeff_c1, coeff_c2, discriminant, delta_roots, eval_r, w_min_location,
};
use crate::roots::bisect_monotone;
use crate::{Error, Result};

/// An explosion time: positive and finite in cases A/B, infinite in C/D.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExplosionTime {
    case: CaseLabel,
    time: Option<f64>,
}

impl ExplosionTime {
    pub(crate) fn finite(case: CaseLabel, t: f64) -> Self {
        debug_assert!(t > 0.0 && t.is_finite());
        ExplosionTime { case, time: Some(t) }
    }

    pub(crate) fn infinite(case: CaseLabel) -> Self {
        ExplosionTime { case, time: None }
    }

    pub fn case(&self) -> CaseLabel {
        self.case
    }

    pub fn is_finite(&self) -> bool {
        self.time.is_some()
    }

    pub fn value(&self) -> Option<f64> {
        self.time
    }

    /// Finite value, or `f64::INFINITY` (for reporting only).
    pub fn as_f64(&self) -> f64 {
        self.time.unwrap_or(f64::INFINITY)
    }
}

/// Primitive pieces of `1/R(u,.)` shared by the routines below.
struct Primitive {
    c2: f64,
    delta: f64,
    eta2: f64,
}

impl Primitive {
    fn new(p: &ModelParams, u: f64) -> Self {
        Primitive { c2: coeff_c2(p, u), delta: discriminant(p, u), eta2: p.eta * p.eta }
    }

    /// Antiderivative of `1/R` evaluated at `w` (up to a constant), valid on
    /// any interval free of real roots of `R(u,.)`.
    fn eval(&self, w: f64) -> f64 {
        let x = self.eta2 * w + self.c2;
        if self.delta < 0.0 {
            let s = (-self.delta).sqrt();
            (x / (2.0 * s)).atan() / s
        } else if self.delta > 0.0 {
            let r = self.delta.sqrt();
            ((x - 2.0 * r).abs() / (x + 2.0 * r).abs()).ln() / (2.0 * r)
        } else {
            -2.0 / x
        }
    }
}

/// `Q(u,w)` range limit as `w -> inf` in cases A/B: the explosion time.
fn q_limit(pr: &Primitive) -> f64 {
    if pr.delta < 0.0 {
        let s = (-pr.delta).sqrt();
        (std::f64::consts::FRAC_PI_2 - (pr.c2 / (2.0 * s)).atan()) / s
    } else if pr.delta > 0.0 {
        let r = pr.delta.sqrt();
        ((pr.c2 + 2.0 * r) / (pr.c2 - 2.0 * r)).ln() / (2.0 * r)
    } else {
        2.0 / pr.c2
    }
}

/// `Q(u,w) = int_0^w dz / R(u,z)` in closed form.
///
/// Fails when `[0, w]` contains a real root of `R(u,.)` (the integrand pole
/// makes the integral divergent).
pub fn q_integral(p: &ModelParams, u: f64, w: f64) -> Result<f64> {
    if !w.is_finite() {
        return Err(Error::Domain(format!("q_integral: non-finite w = {w}")));
    }
    if w == 0.0 {
        return Ok(0.0);
    }
    let pr = Primitive::new(p, u);
    if pr.delta >= 0.0 {
        let rad = 2.0 * pr.delta.sqrt();
        let lo = (-pr.c2 - rad) / pr.eta2;
        let hi = (-pr.c2 + rad) / pr.eta2;
        let (a, b) = (w.min(0.0), w.max(0.0));
        for root in [lo, hi] {
            if root >= a && root <= b {
                return Err(Error::Domain(format!(
                    "q_integral: R(u,.) has a root at w = {root} inside [{a}, {b}]"
                )));
            }
        }
    }
    Ok(pr.eval(w) - pr.eval(0.0))
}

/// Inverse of `w -> Q(u,w)` on the case-dependent branch through `w = 0`.
///
/// `y` must be non-negative; in cases A/B it must stay below the range
/// limit (the explosion time). Within `1e-6` of that limit the closed-form
/// inversion is abandoned for bracketed bisection on [`q_integral`].
pub fn q_inverse(p: &ModelParams, u: f64, y: f64) -> Result<f64> {
    if !(y >= 0.0) {
        return Err(Error::Domain(format!("q_inverse: y = {y} must be >= 0")));
    }
    if y == 0.0 {
        return Ok(0.0);
    }
    if coeff_c1(u) == 0.0 {
        // R(u,0) = 0 with u in {0,1}: psi sticks to the fixed point.
        return Ok(0.0);
    }
    let case = classify(p, u);
    let pr = Primitive::new(p, u);
    match case {
        CaseLabel::A | CaseLabel::B => {
            let lim = q_limit(&pr);
            if y >= lim {
                return Err(Error::Explosion { t: y, t_star: lim });
            }
            if lim - y < 1e-6 * lim.max(1.0) {
                return invert_by_bisection(p, u, y);
            }
            if pr.delta < 0.0 {
                let s = (-pr.delta).sqrt();
                let phi0 = (pr.c2 / (2.0 * s)).atan();
                Ok((2.0 * s * (s * y + phi0).tan() - pr.c2) / pr.eta2)
            } else if pr.delta > 0.0 {
                // z = (x-2r)/(x+2r) with z0 at w=0; here z0 in (0,1)
                let r = pr.delta.sqrt();
                let z0 = (pr.c2 - 2.0 * r) / (pr.c2 + 2.0 * r);
                let ze = z0 * (2.0 * r * y).exp();
                if ze >= 1.0 {
                    return invert_by_bisection(p, u, y);
                }
                let x = 2.0 * r * (1.0 + ze) / (1.0 - ze);
                Ok((x - pr.c2) / pr.eta2)
            } else {
                // rational branch at the double root: Q = 2/c2 - 2/x
                let x = 2.0 * pr.c2 / (2.0 - y * pr.c2);
                Ok((x - pr.c2) / pr.eta2)
            }
        }
        CaseLabel::C | CaseLabel::D => {
            // Delta >= 0 here; branch between 0 and the first root w_*.
            let r = pr.delta.sqrt();
            let wstar = (-pr.c2 - 2.0 * r) / pr.eta2;
            if pr.delta == 0.0 {
                // degenerate interval (only u in {0,1}, handled above)
                return Ok(0.0);
            }
            let z0 = (pr.c2 - 2.0 * r) / (pr.c2 + 2.0 * r);
            let e = 2.0 * r * y;
            if e > 500.0 {
                // saturated against the root: w = w* - (4r/eta^2) e^{-e}/z0
                return Ok(wstar - 4.0 * r / (pr.eta2 * z0) * (-e).exp());
            }
            let ze = z0 * e.exp();
            let x = 2.0 * r * (1.0 + ze) / (1.0 - ze);
            Ok((x - pr.c2) / pr.eta2)
        }
    }
}

fn invert_by_bisection(p: &ModelParams, u: f64, y: f64) -> Result<f64> {
    // Q is monotone increasing toward its limit; expand the upper bracket.
    let mut hi = 1.0;
    for _ in 0..1200 {
        match q_integral(p, u, hi) {
            Ok(q) if q >= y => break,
            Ok(_) => hi *= 2.0,
            Err(_) => return Err(Error::Bracket("q_inverse: bracket hit a root".into())),
        }
        if hi > 1e300 {
            return Err(Error::Bracket("q_inverse: no finite bracket".into()));
        }
    }
    bisect_monotone(
        |w| q_integral(p, u, w).unwrap_or(f64::INFINITY),
        0.0,
        hi,
        y,
        1e-14 * y.max(1.0),
    )
}

/// Classic-Heston Riccati solution `psi_1(t,u)`, defined by
/// `Q(u, psi_1(t,u)) = t`.
pub fn psi1(p: &ModelParams, u: f64, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("psi1: t = {t} must be >= 0")));
    }
    q_inverse(p, u, t).map_err(|e| match e {
        Error::Explosion { t_star, .. } => Error::Explosion { t, t_star },
        other => other,
    })
}

/// Envelope solution `psibar_1(t,u)` of the ODE driven by the increasing
/// lower envelope of `R(u,.)`: linear with slope `R(u, w0(u))` while below
/// the vertex location `w0(u)`, then the shifted arctan branch. Case B only.
pub fn psi1_bar(p: &ModelParams, u: f64, t: f64) -> Result<f64> {
    if classify(p, u) != CaseLabel::B {
        return Err(Error::Domain(format!("psi1_bar: u = {u} is not in case B")));
    }
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("psi1_bar: t = {t} must be >= 0")));
    }
    let w0 = w_min_location(p, u);
    let vertex = eval_r(p, u, w0); // = -2 Delta / eta^2 > 0 in case B
    let t0 = w0 / vertex;
    if t <= t0 {
        return Ok(vertex * t);
    }
    let tbar = t1_bar_star(p, u)?.as_f64();
    if t >= tbar {
        return Err(Error::Explosion { t, t_star: tbar });
    }
    let s = (-discriminant(p, u)).sqrt();
    if tbar - t < 1e-6 * tbar.max(1.0) {
        // bisection on the envelope time w -> t0 + (F(w) - F(w0)), monotone
        let pr = Primitive::new(p, u);
        let f = |w: f64| t0 + pr.eval(w) - pr.eval(w0);
        let mut hi = w0.max(1.0);
        while f(hi) < t {
            hi *= 2.0;
            if hi > 1e300 {
                return Err(Error::Bracket("psi1_bar: no finite bracket".into()));
            }
        }
        return bisect_monotone(f, w0, hi, t, 1e-14 * t.max(1.0));
    }
    let c2 = coeff_c2(p, u);
    Ok((2.0 * s * (s * (t - t0)).tan() - c2) / (p.eta * p.eta))
}

/// Classic-Heston explosion time `T_1^*(u)`: the arctan branch for
/// `Delta < 0` (cases A/B), the log branch for `Delta > 0` with `c2 > 0`
/// (case A), infinite in cases C/D.
pub fn t1_star(p: &ModelParams, u: f64) -> ExplosionTime {
    let case = classify(p, u);
    if !case.explodes() {
        return ExplosionTime::infinite(case);
    }
    ExplosionTime::finite(case, q_limit(&Primitive::new(p, u)))
}

/// Explosion time of the envelope solution,
/// `(pi/2 - c2/(2 sqrt(-Delta))) / sqrt(-Delta)`. Case B only; always at
/// least `t1_star(u)`.
pub fn t1_bar_star(p: &ModelParams, u: f64) -> Result<ExplosionTime> {
    let case = classify(p, u);
    if case != CaseLabel::B {
        return Err(Error::Domain(format!(
            "t1_bar_star: u = {u} is in case {case}, needs B"
        )));
    }
    let s = (-discriminant(p, u)).sqrt();
    let c2 = coeff_c2(p, u);
    Ok(ExplosionTime::finite(
        case,
        (std::f64::consts::FRAC_PI_2 - c2 / (2.0 * s)) / s,
    ))
}

/// The combined explosion-time curve for `rho < 0`: `T_1^*` on the case-A
/// branch `u <= lambda/(rho eta)`, the envelope time on the case-B branches
/// `(lambda/(rho eta), d_-)` and `(d_+, inf)`. Errors inside `[d_-, d_+]`.
pub fn t1_tilde(p: &ModelParams, u: f64) -> Result<ExplosionTime> {
    if p.rho >= 0.0 {
        return Err(Error::Domain("t1_tilde requires rho < 0".into()));
    }
    let boundary = p.lambda / (p.rho * p.eta);
    if u <= boundary {
        return Ok(t1_star(p, u));
    }
    let (dm, dp) = delta_roots(p);
    if u < dm || u > dp {
        t1_bar_star(p, u)
    } else {
        Err(Error::Domain(format!(
            "t1_tilde: u = {u} lies in [{dm}, {dp}] where the explosion time is infinite"
        )))
    }
}
