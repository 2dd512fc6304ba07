//! Moment explosions and implied-volatility wing asymptotics for rough and
//! classic Heston models.
//!
//! The variance process of the rough Heston model is driven by the power-law
//! kernel `t^(alpha-1)/Gamma(alpha)` with `alpha` in `(1/2, 1]`; `alpha = 1`
//! recovers the classic Heston model. The moment of order `u` of the asset
//! price explodes at a finite time whenever the quadratic symbol
//!
//! ```text
//! R(u,w) = u(u-1)/2 + w (rho*eta*u - lambda) + (eta^2/2) w^2
//! ```
//!
//! is positive and eventually increasing along the solution path of the
//! Volterra-Riccati equation `psi(t) = int_0^t kappa(t-s) R(u, psi(s)) ds`.
//! This crate provides
//!
//! * the symbol, its discriminant and the A-D case classification
//!   ([`riccati`]),
//! * closed-form classic-Heston quantities: `Q`-integral, `psi_1`, explosion
//!   times ([`heston`]),
//! * power-law and resolvent kernels, time-changes and the Mittag-Leffler
//!   function ([`kernels`], [`ml`]),
//! * a product-integration solver for the Volterra-Riccati equation with
//!   blow-up detection and MGF evaluation ([`solver`]),
//! * upper bounds for the rough explosion time ([`bounds`]), critical
//!   moments and pseudo-moments ([`critical`]), and asymptotic
//!   implied-volatility slope bounds ([`implied_vol`]),
//! * a CLI front end emitting sweep data as CSV/JSON ([`cli`]).

// Validation guards are written in the negated form `!(x > 0.0)` on
// purpose: they must also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod cli;
pub mod critical;
pub mod export;
pub mod heston;
pub mod implied_vol;
pub mod kernels;
pub mod ml;
pub mod params;
pub mod riccati;
mod roots;
pub mod solver;

pub use heston::ExplosionTime;
pub use params::{CaseLabel, ModelParams};
pub use solver::{PsiSolution, SolverConfig, VarianceCurve};

/// Crate-wide error type.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Parameter or configuration validation failure.
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
    /// Input outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A quantity was requested at or beyond a moment-explosion time.
    #[error("explosion: requested t = {t} but the explosion time is {t_star}")]
    Explosion { t: f64, t_star: f64 },
    /// No blow-up was detected before the configured horizon.
    #[error("horizon too short: no blow-up before t = {horizon}")]
    HorizonTooShort { horizon: f64 },
    /// Outside the documented accuracy envelope of a numerical routine.
    #[error("accuracy: {0}")]
    Accuracy(String),
    /// Root bracketing or bisection failure.
    #[error("bracketing: {0}")]
    Bracket(String),
    #[error("io: {0}")]
    Io(String),
    #[error("parse: {0}")]
    Parse(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
