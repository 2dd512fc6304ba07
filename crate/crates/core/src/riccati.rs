//! The quadratic symbol `R(u,w)`, its variants and the A-D classification.
//!
//! Writing `R(u,w) = c1(u) + c2(u) w + (eta^2/2) w^2` with
//! `c1(u) = u(u-1)/2` and `c2(u) = rho*eta*u - lambda`, the discriminant of
//! `w -> R(u,w)` is `Delta(u) = (c2(u)^2 - eta^2 (u^2 - u))/4` and the real
//! roots, when they exist, sit at `(-c2 -/+ 2 sqrt(Delta))/eta^2`.

use crate::params::{CaseLabel, ModelParams};
use crate::{Error, Result};

pub(crate) fn coeff_c1(u: f64) -> f64 {
    0.5 * u * (u - 1.0)
}

pub(crate) fn coeff_c2(p: &ModelParams, u: f64) -> f64 {
    p.rho * p.eta * u - p.lambda
}

/// `R(u,w) = u(u-1)/2 + w (rho eta u - lambda) + (eta^2/2) w^2`.
pub fn eval_r(p: &ModelParams, u: f64, w: f64) -> f64 {
    coeff_c1(u) + w * (coeff_c2(p, u) + 0.5 * p.eta * p.eta * w)
}

/// `R0(u,w) = R(u,w) + lambda w`, the symbol of the resolvent-form equation.
pub fn eval_r0(p: &ModelParams, u: f64, w: f64) -> f64 {
    eval_r(p, u, w) + p.lambda * w
}

/// Increasing lower envelope of `w -> R(u,w)`: constant at the vertex value
/// left of the minimum location, equal to `R` to the right of it.
pub fn eval_rbar(p: &ModelParams, u: f64, w: f64) -> f64 {
    let w0 = w_min_location(p, u);
    if w <= w0 {
        eval_r(p, u, w0)
    } else {
        eval_r(p, u, w)
    }
}

/// Discriminant `Delta(u) = ((rho eta u - lambda)^2 - eta^2 (u^2 - u))/4`.
pub fn discriminant(p: &ModelParams, u: f64) -> f64 {
    let c2 = coeff_c2(p, u);
    0.25 * (c2 * c2 - p.eta * p.eta * (u * u - u))
}

/// The two real roots `d_- < d_+` of `u -> Delta(u)`.
///
/// `Delta` is a downward parabola in `u` with `Delta(0) = lambda^2/4 > 0`,
/// so real roots exist for every `rho` in `(-1, 1)`. Computed with the
/// cancellation-safe quadratic formula. For `rho < 0` the ordering
/// `lambda/(rho eta) < d_- < 0 < 1 < d_+` holds.
pub fn delta_roots(p: &ModelParams) -> (f64, f64) {
    // 4*Delta(u) = a u^2 + b u + c
    let a = p.eta * p.eta * (p.rho * p.rho - 1.0);
    let b = p.eta * (p.eta - 2.0 * p.rho * p.lambda);
    let c = p.lambda * p.lambda;
    let disc = (b * b - 4.0 * a * c).sqrt();
    let q = -0.5 * (b + if b >= 0.0 { disc } else { -disc });
    let (r1, r2) = (q / a, c / q);
    (r1.min(r2), r1.max(r2))
}

/// Location `w0(u) = -c2(u)/eta^2` of the global minimum of `w -> R(u,w)`.
pub fn w_min_location(p: &ModelParams, u: f64) -> f64 {
    -coeff_c2(p, u) / (p.eta * p.eta)
}

/// Location `w_*(u) = (-c2(u) - 2 sqrt(Delta(u)))/eta^2` of the first
/// (smaller) real root of `w -> R(u,w)`.
///
/// Fails with a domain error when `Delta(u) < 0` (cases A/B without real
/// roots).
pub fn w_first_root(p: &ModelParams, u: f64) -> Result<f64> {
    let d = discriminant(p, u);
    if d < 0.0 {
        return Err(Error::Domain(format!(
            "R(u,.) has no real roots at u = {u} (case A/B)"
        )));
    }
    Ok((-coeff_c2(p, u) - 2.0 * d.sqrt()) / (p.eta * p.eta))
}

/// Classify a moment order by the sign of `R(u,0)`, the slope at zero and
/// the real-root structure. Valid for any `rho` in `(-1,1)`; for `rho < 0`
/// the result coincides with the interval classification built from
/// `lambda/(rho eta)` and [`delta_roots`].
///
/// Boundary ties resolve by the non-strict inequalities of the case list:
/// `c2(u) = 0` gives A, `R(u,0) = 0` gives D, and `Delta(u) = 0` with a
/// positive double root gives C.
pub fn classify(p: &ModelParams, u: f64) -> CaseLabel {
    if coeff_c1(u) <= 0.0 {
        return CaseLabel::D;
    }
    if coeff_c2(p, u) >= 0.0 {
        return CaseLabel::A;
    }
    // c1 > 0 and c2 < 0: roots, when real, are both positive.
    if discriminant(p, u) < 0.0 {
        CaseLabel::B
    } else {
        CaseLabel::C
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::CaseLabel::*;
    use rand::{Rng, SeedableRng};

    fn p8() -> ModelParams {
        ModelParams::new(-0.8, 2.0, 0.2, 0.6, 0.04).unwrap()
    }

    #[test]
    fn symbol_values() {
        let p = p8();
        assert_eq!(eval_r(&p, 0.0, 0.0), 0.0);
        assert_eq!(eval_r(&p, 1.0, 0.0), 0.0);
        assert_eq!(eval_r(&p, -20.0, 0.0), 210.0);
        // R0 identity: R0 - R = lambda w
        for &(u, w) in &[(-20.0, 1.0), (3.5, -2.0), (60.0, 11.0)] {
            let diff = eval_r0(&p, u, w) - eval_r(&p, u, w);
            assert!((diff - p.lambda * w).abs() < 1e-12 * (1.0 + w.abs()));
        }
        assert!((eval_r0(&p, -20.0, 1.0) - 213.22).abs() < 1e-12);
    }

    #[test]
    fn envelope_matches_vertex_and_tail() {
        let p = p8();
        let u = 60.0;
        let w0 = w_min_location(&p, u);
        assert!((w0 - 290.0).abs() < 1e-10);
        // below the minimum: constant vertex value c1 - c2^2/(2 eta^2) = 88
        assert!((eval_rbar(&p, u, 0.0) - 88.0).abs() < 1e-9);
        assert!((eval_rbar(&p, u, w0) - eval_r(&p, u, w0)).abs() < 1e-12);
        // above the minimum the envelope equals R
        assert_eq!(eval_rbar(&p, u, w0 + 50.0), eval_r(&p, u, w0 + 50.0));
    }

    #[test]
    fn envelope_bounds_and_monotonicity() {
        let p = p8();
        for &u in &[-20.0, -8.0, 0.5, 10.0, 60.0] {
            let mut prev = f64::NEG_INFINITY;
            for i in -200..=200 {
                let w = i as f64 * 2.0;
                let rb = eval_rbar(&p, u, w);
                assert!(rb <= eval_r(&p, u, w) + 1e-10);
                assert!(rb >= prev - 1e-10 * (1.0 + rb.abs()), "u={u} w={w}");
                prev = rb;
            }
        }
    }

    #[test]
    fn vertex_is_global_minimum_on_grid() {
        let p = p8();
        for &u in &[-20.0, 10.0, 60.0] {
            let vmin = eval_r(&p, u, w_min_location(&p, u));
            for i in -400..=400 {
                let w = i as f64;
                assert!(eval_r(&p, u, w) >= vmin - 1e-9 * (1.0 + vmin.abs()));
            }
        }
    }

    #[test]
    fn discriminant_values() {
        let p = p8();
        assert!((discriminant(&p, -20.0) + 3.84).abs() < 1e-12);
        assert!((discriminant(&p, 0.0) - 1.0).abs() < 1e-12); // lambda^2/4
        assert!((discriminant(&p, 60.0) + 1.76).abs() < 1e-12);
    }

    #[test]
    fn delta_roots_section8() {
        let p = p8();
        let (dm, dp) = delta_roots(&p);
        // frozen from high-precision evaluation of the quadratic in u
        assert!((dm - -5.28979450928446).abs() < 1e-11);
        assert!((dp - 52.5120167315067).abs() < 1e-10);
        // root property, relative to the size of the quadratic's terms
        for d in [dm, dp] {
            let scale = 0.25
                * (p.eta * p.eta * (1.0 - p.rho * p.rho) * d * d
                    + (p.eta * (p.eta - 2.0 * p.rho * p.lambda) * d).abs()
                    + p.lambda * p.lambda);
            assert!(discriminant(&p, d).abs() <= 1e-10 * scale);
        }
        // ordering guaranteed for rho < 0
        let lre = p.lambda / (p.rho * p.eta);
        assert!((lre - -12.5).abs() < 1e-12);
        assert!(lre < dm && dm < 0.0 && 1.0 < dp);
    }

    #[test]
    fn w_locations() {
        let p = p8();
        assert!((w_min_location(&p, 60.0) - 290.0).abs() < 1e-10);
        let ws = w_first_root(&p, 10.0).unwrap();
        assert!((ws - 13.5147072961082).abs() < 1e-10);
        assert!(eval_r(&p, 10.0, ws).abs() < 1e-9);
        // u = 0: c2 = -lambda, Delta = lambda^2/4, first root at 0
        assert!(w_first_root(&p, 0.0).unwrap().abs() < 1e-12);
        // no real roots in case A/B
        assert!(w_first_root(&p, -20.0).is_err());
        assert!(w_first_root(&p, 60.0).is_err());
    }

    #[test]
    fn classify_section8() {
        let p = p8();
        assert_eq!(classify(&p, -20.0), A);
        assert_eq!(classify(&p, -12.5), A); // boundary c2 = 0 -> A
        assert_eq!(classify(&p, 0.5), D);
        assert_eq!(classify(&p, 0.0), D); // boundary R(u,0) = 0 -> D
        assert_eq!(classify(&p, 1.0), D);
        assert_eq!(classify(&p, 10.0), C);
        assert_eq!(classify(&p, -3.0), C);
        assert_eq!(classify(&p, 60.0), B);
        assert_eq!(classify(&p, -8.0), B);
    }

    /// classification agrees with the rho<0 interval table built from
    /// lambda/(rho eta) and the discriminant roots, on random draws.
    #[test]
    fn classify_matches_interval_table() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed);
        for _ in 0..1000 {
            let p = ModelParams::new(
                rng.gen_range(-0.95..-0.05),
                rng.gen_range(0.1..5.0),
                rng.gen_range(0.05..2.0),
                0.6,
                0.04,
            )
            .unwrap();
            let (dm, dp) = delta_roots(&p);
            let lre = p.lambda / (p.rho * p.eta);
            assert!(lre < dm && dm < 0.0 && dp > 1.0, "ordering {p:?}");
            let u = rng.gen_range(-60.0..160.0);
            let expected = if u <= lre {
                A
            } else if u < dm || u > dp {
                B
            } else if u < 0.0 || (u > 1.0 && u <= dp) {
                C
            } else {
                D
            };
            assert_eq!(classify(&p, u), expected, "u={u} params={p:?}");
        }
    }

    /// eval_r at the first root is ~0 whenever the discriminant allows it.
    #[test]
    fn root_property_random() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let mut checked = 0;
        while checked < 500 {
            let p = ModelParams::new(
                rng.gen_range(-0.95..0.95),
                rng.gen_range(0.1..5.0),
                rng.gen_range(0.05..2.0),
                0.75,
                0.04,
            )
            .unwrap();
            let u = rng.gen_range(-50.0..50.0);
            if discriminant(&p, u) < 0.0 {
                continue;
            }
            let ws = w_first_root(&p, u).unwrap();
            let scale = coeff_c1(u).abs() + (coeff_c2(&p, u) * ws).abs()
                + 0.5 * p.eta * p.eta * ws * ws;
            assert!(eval_r(&p, u, ws).abs() <= 1e-9 * (1.0 + scale));
            checked += 1;
        }
    }
}
