//! Bracketed bisection for monotone function inversion.

use crate::{Error, Result};

/// Find `x` in `[lo, hi]` with `f(x) = target`, assuming `f` is monotone on
/// the bracket. The bracket must straddle the target. Converges on both the
/// residual and the interval width.
pub(crate) fn bisect_monotone(
    f: impl Fn(f64) -> f64,
    mut lo: f64,
    mut hi: f64,
    target: f64,
    residual_tol: f64,
) -> Result<f64> {
    let flo = f(lo) - target;
    let fhi = f(hi) - target;
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::Bracket(format!(
            "no sign change on [{lo}, {hi}] (f-target = {flo}, {fhi})"
        )));
    }
    let increasing = flo < 0.0;
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..200 {
        mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break; // interval exhausted at f64 resolution
        }
        let fm = f(mid) - target;
        if fm.abs() <= residual_tol {
            return Ok(mid);
        }
        if (fm < 0.0) == increasing {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(mid)
}
