//! Power-law and resolvent kernels, their time-changes and fixed points.
//!
//! A kernel here is a non-negative, non-increasing function `kappa` on
//! `(0, inf)` with finite integral over every bounded interval. Three
//! variants are supported: the power-law kernel
//! `kappa_alpha(t) = t^(alpha-1)/Gamma(alpha)`, the scaled resolvent kernel
//! `r_{alpha,lambda}(t)/lambda = t^(alpha-1) E_{alpha,alpha}(-lambda t^alpha)`,
//! and tabulated kernels loaded from two-column files (interpolated
//! piecewise-constant so that monotonicity is preserved exactly).

pub use crate::ml::mittag_leffler;
use crate::params::ModelParams;
use crate::roots::bisect_monotone;
use crate::{Error, Result};

/// `kappa_alpha(t) = t^(alpha-1)/Gamma(alpha)`; constant 1 for `alpha = 1`.
pub fn kappa_alpha(alpha: f64, t: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if alpha == 1.0 {
        return Ok(1.0);
    }
    if t <= 0.0 {
        return Err(Error::Domain(format!(
            "kappa_alpha is singular at t = {t} for alpha < 1"
        )));
    }
    Ok(t.powf(alpha - 1.0) / libm::tgamma(alpha))
}

/// `K_alpha(t) = int_0^t kappa_alpha = t^alpha / (alpha Gamma(alpha))`.
pub fn cumulative_k(alpha: f64, t: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if t < 0.0 {
        return Err(Error::Domain(format!("cumulative_k: t = {t} < 0")));
    }
    Ok(t.powf(alpha) / libm::tgamma(alpha + 1.0))
}

/// Positive fixed point of `K_alpha`, `(alpha Gamma(alpha))^(1/(alpha-1))`.
///
/// At `alpha = 1` the time-change is the identity and every point is fixed;
/// by convention 1.0 is returned there.
pub fn fixed_point_t_alpha(alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if alpha == 1.0 {
        return Ok(1.0);
    }
    Ok(libm::tgamma(alpha + 1.0).powf(1.0 / (alpha - 1.0)))
}

/// Resolvent of `lambda * kappa_alpha`:
/// `lambda t^(alpha-1) E_{alpha,alpha}(-lambda t^alpha)` for `alpha < 1`,
/// `lambda e^(-lambda t)` for `alpha = 1`.
pub fn resolvent(p: &ModelParams, t: f64) -> Result<f64> {
    if t <= 0.0 {
        return Err(Error::Domain(format!("resolvent: t = {t} must be positive")));
    }
    if p.is_classic() {
        return Ok(p.lambda * (-p.lambda * t).exp());
    }
    let e = mittag_leffler(p.alpha, p.alpha, -p.lambda * t.powf(p.alpha))?;
    Ok(p.lambda * t.powf(p.alpha - 1.0) * e)
}

/// `L_{alpha,lambda}(t) = (1/lambda) int_0^t r_{alpha,lambda}(s) ds
///                      = (1 - E_{alpha,1}(-lambda t^alpha)) / lambda`.
///
/// The closed form follows from term-wise integration of the resolvent
/// series; `ml_resolvent_integrals` in the tests pins it against adaptive
/// quadrature of the resolvent itself. `L` increases to `1/lambda`.
pub fn cumulative_l(p: &ModelParams, t: f64) -> Result<f64> {
    if t < 0.0 {
        return Err(Error::Domain(format!("cumulative_l: t = {t} < 0")));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    if p.is_classic() {
        return Ok((1.0 - (-p.lambda * t).exp()) / p.lambda);
    }
    let e = mittag_leffler(p.alpha, 1.0, -p.lambda * t.powf(p.alpha))?;
    Ok((1.0 - e) / p.lambda)
}

/// Unique positive fixed point of `L_{alpha,lambda}`, by bracketed
/// bisection to 1e-10 absolute.
///
/// For `alpha = 1` one has `L(t) < t` for every `t > 0` (the slope
/// `e^(-lambda t)` is below one), so there is no positive fixed point and
/// the request is rejected.
pub fn fixed_point_t_alpha_lambda(p: &ModelParams) -> Result<f64> {
    if p.is_classic() {
        return Err(Error::Domain(
            "L has no positive fixed point at alpha = 1".into(),
        ));
    }
    // L(t) - t > 0 for small t (infinite slope at 0), < 0 past 1/lambda.
    let g = |t: f64| cumulative_l(p, t).unwrap_or(f64::NAN) - t;
    let lo = 1e-12;
    let hi = 1.0 / p.lambda + 1.0;
    if !(g(lo) > 0.0 && g(hi) < 0.0) {
        return Err(Error::Bracket(
            "fixed point of L not bracketed by (0, 1/lambda + 1)".into(),
        ));
    }
    bisect_monotone(g, lo, hi, 0.0, 1e-10)
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !alpha.is_finite() || alpha <= 0.5 || alpha > 1.0 {
        return Err(Error::InvalidParams(format!(
            "alpha = {alpha} must lie in (1/2, 1]"
        )));
    }
    Ok(())
}

/// A kernel admissible for the Volterra-Riccati comparison machinery.
#[derive(Debug, Clone)]
pub enum Kernel {
    /// `t^(alpha-1)/Gamma(alpha)`; constant 1 at `alpha = 1`.
    PowerLaw { alpha: f64 },
    /// `r_{alpha,lambda}(t)/lambda`, the kernel of the resolvent-form
    /// Volterra equation. Requires `alpha < 1`.
    ScaledResolvent { alpha: f64, lambda: f64 },
    /// Piecewise-constant interpolation of tabulated values.
    Tabulated(TabulatedKernel),
}

impl Kernel {
    pub fn power_law(alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(Kernel::PowerLaw { alpha })
    }

    pub fn scaled_resolvent(alpha: f64, lambda: f64) -> Result<Self> {
        check_alpha(alpha)?;
        if alpha == 1.0 {
            return Err(Error::InvalidParams(
                "scaled resolvent kernel requires alpha < 1".into(),
            ));
        }
        if !(lambda > 0.0) {
            return Err(Error::InvalidParams(format!(
                "lambda = {lambda} must be positive"
            )));
        }
        Ok(Kernel::ScaledResolvent { alpha, lambda })
    }

    pub fn tag(&self) -> &'static str {
        match self {
            Kernel::PowerLaw { .. } => "power-law",
            Kernel::ScaledResolvent { .. } => "scaled-resolvent",
            Kernel::Tabulated(_) => "tabulated",
        }
    }

    /// Point evaluation `kappa(t)`, `t > 0`.
    pub fn evaluate(&self, t: f64) -> Result<f64> {
        match self {
            Kernel::PowerLaw { alpha } => kappa_alpha(*alpha, t),
            Kernel::ScaledResolvent { alpha, lambda } => {
                if t <= 0.0 {
                    return Err(Error::Domain(format!("kernel singular at t = {t}")));
                }
                let e = mittag_leffler(*alpha, *alpha, -lambda * t.powf(*alpha))?;
                Ok(t.powf(alpha - 1.0) * e)
            }
            Kernel::Tabulated(k) => k.evaluate(t),
        }
    }

    /// `int_0^t kappa(s) ds`.
    pub fn cumulative(&self, t: f64) -> Result<f64> {
        self.iterated(1, t)
    }

    /// m-fold iterated integral `K_m` of the kernel (`K_1` cumulative,
    /// `K_{m+1} = int_0^t K_m`), exact per variant; `m` in `1..=4`.
    pub(crate) fn iterated(&self, m: u8, t: f64) -> Result<f64> {
        debug_assert!((1..=4).contains(&m));
        if t < 0.0 {
            return Err(Error::Domain(format!("kernel integral: t = {t} < 0")));
        }
        if t == 0.0 {
            return Ok(0.0);
        }
        match self {
            Kernel::PowerLaw { alpha } => {
                let e = alpha + m as f64 - 1.0;
                Ok(t.powf(e) / libm::tgamma(e + 1.0))
            }
            Kernel::ScaledResolvent { alpha, lambda } => {
                // K_m(t) = (t^(m-1)/lambda) (1/(m-1)! - E_{alpha,m}(-lambda t^alpha))
                let e = mittag_leffler(*alpha, m as f64, -lambda * t.powf(*alpha))?;
                let inv_fact = [1.0, 1.0, 0.5, 1.0 / 6.0][(m - 1) as usize];
                Ok(t.powi(m as i32 - 1) / lambda * (inv_fact - e))
            }
            Kernel::Tabulated(k) => Ok(k.iterated(m, t)),
        }
    }
}

/// Piecewise-constant-decreasing interpolation of tabulated kernel values.
///
/// The value on `[t_i, t_{i+1})` is `kappa_i`; left of the first node the
/// first value extends, right of the last node the last value extends. This
/// keeps the interpolant non-increasing exactly, which is what the
/// comparison machinery needs (smoothness is not required).
#[derive(Debug, Clone)]
pub struct TabulatedKernel {
    ts: Vec<f64>,
    vals: Vec<f64>,
    /// iterated integrals K_1..K_4 at the nodes
    node_int: [Vec<f64>; 4],
}

impl TabulatedKernel {
    pub fn from_points(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidParams(
                "tabulated kernel needs at least two points".into(),
            ));
        }
        for w in points.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(Error::InvalidParams(
                    "tabulated kernel abscissae must be strictly increasing".into(),
                ));
            }
            if w[1].1 > w[0].1 {
                return Err(Error::InvalidParams(
                    "tabulated kernel values must be non-increasing".into(),
                ));
            }
        }
        if points.iter().any(|&(t, v)| !t.is_finite() || !v.is_finite() || v <= 0.0 || t < 0.0) {
            return Err(Error::InvalidParams(
                "tabulated kernel needs finite non-negative times and positive values".into(),
            ));
        }
        let ts: Vec<f64> = points.iter().map(|p| p.0).collect();
        let vals: Vec<f64> = points.iter().map(|p| p.1).collect();
        let mut k = TabulatedKernel {
            ts,
            vals,
            node_int: [vec![], vec![], vec![], vec![]],
        };
        k.precompute();
        Ok(k)
    }

    /// Two-column whitespace-separated text, `#` comments allowed.
    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut pts = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut it = line.split_whitespace();
            let (a, b) = (it.next(), it.next());
            match (a, b) {
                (Some(a), Some(b)) => {
                    let t: f64 = a
                        .parse()
                        .map_err(|_| Error::Parse(format!("line {}: bad time {a:?}", i + 1)))?;
                    let v: f64 = b
                        .parse()
                        .map_err(|_| Error::Parse(format!("line {}: bad value {b:?}", i + 1)))?;
                    pts.push((t, v));
                }
                _ => return Err(Error::Parse(format!("line {}: expected two columns", i + 1))),
            }
        }
        Self::from_points(pts)
    }

    fn precompute(&mut self) {
        let n = self.ts.len();
        for lvl in 0..4 {
            self.node_int[lvl] = vec![0.0; n];
        }
        // K_m at nodes, integrating the constant-kappa Taylor form per piece.
        // Left of ts[0] the kernel is vals[0].
        let mut prev = [0.0f64; 4];
        let mut prev_t = 0.0f64;
        for i in 0..n {
            let h = self.ts[i] - prev_t;
            let kap = if i == 0 { self.vals[0] } else { self.vals[i - 1] };
            let cur = advance_constant(prev, kap, h);
            for (lvl, v) in cur.iter().enumerate() {
                self.node_int[lvl][i] = *v;
            }
            prev = cur;
            prev_t = self.ts[i];
        }
    }

    fn segment(&self, t: f64) -> usize {
        // index i such that kernel value on [ts[i], t] is vals[i] (t >= ts[i]);
        // returns 0 with value vals[0] for t < ts[0]
        match self.ts.binary_search_by(|x| x.partial_cmp(&t).unwrap()) {
            Ok(i) => i,
            Err(0) => 0,
            Err(i) => i - 1,
        }
    }

    pub fn evaluate(&self, t: f64) -> Result<f64> {
        if t < 0.0 {
            return Err(Error::Domain(format!("tabulated kernel: t = {t} < 0")));
        }
        if t < self.ts[0] {
            return Ok(self.vals[0]);
        }
        Ok(self.vals[self.segment(t)])
    }

    fn iterated(&self, m: u8, t: f64) -> f64 {
        let (base, t0, kap) = if t < self.ts[0] {
            ([0.0; 4], 0.0, self.vals[0])
        } else {
            let i = self.segment(t);
            (
                [
                    self.node_int[0][i],
                    self.node_int[1][i],
                    self.node_int[2][i],
                    self.node_int[3][i],
                ],
                self.ts[i],
                self.vals[i],
            )
        };
        advance_constant(base, kap, t - t0)[(m - 1) as usize]
    }
}

/// Advance the stack (K1..K4) across a stretch of length `h` where the
/// kernel is the constant `kap`: exact Taylor update.
fn advance_constant(prev: [f64; 4], kap: f64, h: f64) -> [f64; 4] {
    let h2 = h * h;
    [
        prev[0] + kap * h,
        prev[1] + prev[0] * h + kap * h2 / 2.0,
        prev[2] + prev[1] * h + prev[0] * h2 / 2.0 + kap * h2 * h / 6.0,
        prev[3] + prev[2] * h + prev[1] * h2 / 2.0 + prev[0] * h2 * h / 6.0 + kap * h2 * h2 / 24.0,
    ]
}
