//! Model parameters and the A-D case classification labels.

use crate::{Error, Result};

/// Parameters of the (rough) Heston variance process.
///
/// `alpha = 1` is the classic Heston model; `alpha` in `(1/2, 1)` the rough
/// variant with Hurst index `alpha - 1/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Spot/variance correlation, in (-1, 1).
    pub rho: f64,
    /// Mean-reversion speed, > 0.
    pub lambda: f64,
    /// Volatility of volatility, > 0.
    pub eta: f64,
    /// Roughness index, in (1/2, 1].
    pub alpha: f64,
    /// Spot variance, >= 0.
    pub v0: f64,
}

impl ModelParams {
    pub fn new(rho: f64, lambda: f64, eta: f64, alpha: f64, v0: f64) -> Result<Self> {
        let p = Self { rho, lambda, eta, alpha, v0 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.rho.is_finite() || self.rho <= -1.0 || self.rho >= 1.0 {
            return Err(Error::InvalidParams(format!(
                "rho = {} must lie in (-1, 1)",
                self.rho
            )));
        }
        if !self.lambda.is_finite() || self.lambda <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "lambda = {} must be positive",
                self.lambda
            )));
        }
        if !self.eta.is_finite() || self.eta <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "eta = {} must be positive",
                self.eta
            )));
        }
        if !self.alpha.is_finite() || self.alpha <= 0.5 || self.alpha > 1.0 {
            return Err(Error::InvalidParams(format!(
                "alpha = {} must lie in (1/2, 1]",
                self.alpha
            )));
        }
        if !self.v0.is_finite() || self.v0 < 0.0 {
            return Err(Error::InvalidParams(format!(
                "v0 = {} must be non-negative",
                self.v0
            )));
        }
        Ok(())
    }

    /// True for the classic (non-rough) model.
    pub fn is_classic(&self) -> bool {
        self.alpha == 1.0
    }
}

/// Classification of a moment order `u` by the shape of `w -> R(u,w)`.
///
/// * `A`: `R(u,0) > 0` and the slope at 0 is non-negative,
/// * `B`: `R(u,0) > 0`, negative slope at 0, no real roots,
/// * `C`: `R(u,0) > 0`, negative slope at 0, positive real roots,
/// * `D`: `R(u,0) <= 0`.
///
/// In cases A and B the Volterra-Riccati solution explodes in finite time;
/// in C and D it exists globally.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CaseLabel {
    A,
    B,
    C,
    D,
}

impl CaseLabel {
    /// Finite explosion time in this case?
    pub fn explodes(&self) -> bool {
        matches!(self, CaseLabel::A | CaseLabel::B)
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            CaseLabel::A => "A",
            CaseLabel::B => "B",
            CaseLabel::C => "C",
            CaseLabel::D => "D",
        }
    }
}

impl std::fmt::Display for CaseLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}
