//! Asymptotic implied-volatility slope (AIVS) via the moment formula.
//!
//! The squared implied volatility per unit log-moneyness approaches
//! `varsigma(y)/T` in the wings, where `y` is built from the critical
//! moments and `varsigma(y) = 2 - 4 (sqrt(y^2 + y) - y)`. Everything here
//! is computed from critical moments; no option prices or smile
//! construction are involved.

use crate::critical::{threshold_t_crit_prime, u1_critical, Side};
use crate::kernels::cumulative_k;
use crate::params::ModelParams;
use crate::{Error, Result};

/// Which wing of the smile.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Wing {
    Left,
    Right,
}

/// `varsigma(y) = 2 - 4 (sqrt(y^2+y) - y)`, evaluated cancellation-free as
/// `2 / (1 + 2y + 2 sqrt(y^2 + y))`. Strictly decreasing from 2 to 0.
pub fn lee_varsigma(y: f64) -> Result<f64> {
    if !(y >= 0.0) || !y.is_finite() {
        return Err(Error::Domain(format!("lee_varsigma: y = {y} must be >= 0")));
    }
    Ok(2.0 / (1.0 + 2.0 * y + 2.0 * (y * y + y).sqrt()))
}

/// Classic-Heston asymptotic implied-volatility slope at maturity `T`:
/// `varsigma(-u_1^-(T))/T` on the left wing, `varsigma(u_1^+(T) - 1)/T` on
/// the right.
pub fn aivs_classic(p: &ModelParams, t: f64, wing: Wing) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("aivs_classic: T = {t} must be positive")));
    }
    let y = match wing {
        Wing::Left => -u1_critical(p, t, Side::Lower)?,
        Wing::Right => u1_critical(p, t, Side::Upper)? - 1.0,
    };
    Ok(lee_varsigma(y)? / t)
}

/// Non-asymptotic lower bound for the rough left-wing slope, valid for
/// `0 < T <= T'_crit`:
/// `(T^(alpha-1)/(alpha Gamma(alpha))) * AIVS_1^-(T^alpha/(alpha Gamma(alpha)))`.
pub fn aivs_rough_lower_left(p: &ModelParams, t: f64) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("aivs_rough_lower_left: T = {t} must be positive")));
    }
    let tp = threshold_t_crit_prime(p)?;
    if t > tp {
        return Err(Error::Domain(format!(
            "aivs_rough_lower_left: T = {t} exceeds T'_crit = {tp}"
        )));
    }
    let ag = libm::tgamma(p.alpha + 1.0);
    let karg = cumulative_k(p.alpha, t)?;
    Ok(t.powf(p.alpha - 1.0) / ag * aivs_classic(p, karg, Wing::Left)?)
}

/// Small-maturity constants of the wing asymptotics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmallTConstants {
    /// `C_- = pi - 2 arctan(-rho/sqrt(1-rho^2))`.
    pub c_minus: f64,
    /// `C_+ = pi - 2 arctan(rho/sqrt(1-rho^2))`.
    pub c_plus: f64,
    /// `D = pi - 2 rho / sqrt(1-rho^2)`.
    pub d: f64,
    /// Classic left-wing slope limit `eta sqrt(1-rho^2)/(2 C_-)`.
    pub aivs0_left: f64,
    /// Classic right-wing slope limit `eta sqrt(1-rho^2)/(2 C_+)`.
    pub aivs0_right: f64,
    /// `C_+/D`, the right-wing attenuation, in (0, 1) for `rho < 0`.
    pub right_prefactor: f64,
}

pub fn aivs_small_t_constants(p: &ModelParams) -> Result<SmallTConstants> {
    if p.rho >= 0.0 {
        return Err(Error::Domain("small-T constants require rho < 0".into()));
    }
    let sq = (1.0 - p.rho * p.rho).sqrt();
    let pi = std::f64::consts::PI;
    let c_minus = pi - 2.0 * (-p.rho / sq).atan();
    let c_plus = pi - 2.0 * (p.rho / sq).atan();
    let d = pi - 2.0 * p.rho / sq;
    Ok(SmallTConstants {
        c_minus,
        c_plus,
        d,
        aivs0_left: p.eta * sq / (2.0 * c_minus),
        aivs0_right: p.eta * sq / (2.0 * c_plus),
        right_prefactor: c_plus / d,
    })
}

/// Small-maturity lower bounds for the rough slope, valid as `T -> 0`:
/// left wing `(T^(alpha-1)/(alpha Gamma(alpha))) AIVS_1^-(0)`, right wing
/// additionally attenuated by `C_+/D`. These are asymptotic statements
/// only; no finite-maturity validity is claimed.
pub fn aivs_rough_asymptotic_bound(p: &ModelParams, t: f64, wing: Wing) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("asymptotic bound: T = {t} must be positive")));
    }
    let c = aivs_small_t_constants(p)?;
    let pref = t.powf(p.alpha - 1.0) / libm::tgamma(p.alpha + 1.0);
    Ok(match wing {
        Wing::Left => pref * c.aivs0_left,
        Wing::Right => c.right_prefactor * pref * c.aivs0_right,
    })
}

/// One row of the slope sweep (wing-asymptotics figure data).
#[derive(Debug, Clone)]
pub struct AivsSweepRow {
    pub t: f64,
    pub aivs1_left: f64,
    pub aivs1_right: f64,
    pub bound_left: f64,
    pub asym_left: f64,
    pub asym_right: f64,
}

/// Sweep classic slopes and rough bounds over maturities. The
/// non-asymptotic left bound restricts the grid to `(0, T'_crit]`.
pub fn aivs_sweep(p: &ModelParams, t_grid: &[f64]) -> Result<Vec<AivsSweepRow>> {
    let tp = threshold_t_crit_prime(p)?;
    let mut rows = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        if t > tp {
            return Err(Error::InvalidParams(format!(
                "aivs_sweep: T = {t} exceeds T'_crit = {tp}; the non-asymptotic left bound \
                 is undefined there"
            )));
        }
        rows.push(AivsSweepRow {
            t,
            aivs1_left: aivs_classic(p, t, Wing::Left)?,
            aivs1_right: aivs_classic(p, t, Wing::Right)?,
            bound_left: aivs_rough_lower_left(p, t)?,
            asym_left: aivs_rough_asymptotic_bound(p, t, Wing::Left)?,
            asym_right: aivs_rough_asymptotic_bound(p, t, Wing::Right)?,
        });
    }
    Ok(rows)
}

/// CSV dump of a sweep with the exact column names
/// `T, aivs1_left, aivs1_right, bound_left, asym_left, asym_right`.
pub fn aivs_sweep_csv(rows: &[AivsSweepRow], out: &mut impl std::io::Write) -> Result<()> {
    use crate::export::Cell;
    let headers = ["T", "aivs1_left", "aivs1_right", "bound_left", "asym_left", "asym_right"];
    let table: Vec<Vec<Cell>> = rows
        .iter()
        .map(|r| {
            vec![
                Cell::Num(r.t),
                Cell::Num(r.aivs1_left),
                Cell::Num(r.aivs1_right),
                Cell::Num(r.bound_left),
                Cell::Num(r.asym_left),
                Cell::Num(r.asym_right),
            ]
        })
        .collect();
    crate::export::write_csv(out, &headers, &table)
}
