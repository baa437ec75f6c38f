//! Symmetric truncated summation of two-sided series with geometrically
//! decaying terms.

use crate::error::{Error, Result};

pub(crate) const DEFAULT_MAX_TERMS: usize = 2_000_000;

/// Sums `f(0) + Σ_{h≥1} (f(h) + f(-h))` until an analytic tail bound drops
/// below `tol`.
///
/// The terms are assumed to satisfy `|f(h)| + |f(-h)| ≤ A (1+j)^2 rate^j` for
/// `h = H + j` once `A` dominates the running envelope at `H`. The envelope is
/// the running maximum decayed by `rate` per step, so oscillating terms
/// (complex characteristic roots) and polynomial-times-geometric terms (equal
/// roots, or products of two such) are covered. The tail bound is then
/// `A · Σ_{j≥1} (1+j)^2 rate^j = A · ((1+rate)/(1-rate)^3 - 1)`.
///
/// `min_h` forces a minimum number of terms before convergence may be
/// declared, so leading structural zeros cannot trigger an early exit.
pub(crate) fn sum_symmetric<F>(
    f: F,
    rate: f64,
    tol: f64,
    min_h: i64,
    max_terms: usize,
) -> Result<f64>
where
    F: Fn(i64) -> f64,
{
    debug_assert!((0.0..1.0).contains(&rate), "decay rate must be in [0, 1)");
    let tail_factor = (1.0 + rate) / (1.0 - rate).powi(3) - 1.0;
    let mut total = f(0);
    let mut envelope = total.abs();
    for h in 1..=max_terms as i64 {
        let upper = f(h);
        let lower = f(-h);
        total += upper + lower;
        envelope = (upper.abs() + lower.abs()).max(envelope * rate);
        if h >= min_h && envelope * tail_factor <= tol {
            return Ok(total);
        }
    }
    Err(Error::Convergence {
        max_terms,
        bound: envelope * tail_factor,
        tol,
    })
}
