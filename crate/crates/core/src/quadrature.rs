//! Composite trapezoidal rule with node doubling.
//!
//! Every integrand in this crate is a smooth periodic function sampled over a
//! full period, or an even periodic function over a half period, where the
//! trapezoidal rule converges geometrically.

use crate::error::{CadError, Result};

const MAX_LEVELS: u32 = 24;

/// Integrates `f` over `[a, b]`, starting from at least `min_intervals`
/// subintervals and doubling until two successive estimates differ by less
/// than `tol`.
pub fn trapezoid_doubling(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64, min_intervals: usize) -> Result<f64> {
    let mut intervals = min_intervals.max(2);
    let mut h = (b - a) / intervals as f64;
    let mut sum = 0.5 * (f(a) + f(b)) + (1..intervals).map(|i| f(a + i as f64 * h)).sum::<f64>();
    let mut estimate = h * sum;
    for _ in 0..MAX_LEVELS {
        // midpoints of the current grid
        sum += (0..intervals).map(|i| f(a + (i as f64 + 0.5) * h)).sum::<f64>();
        intervals *= 2;
        h *= 0.5;
        let next = h * sum;
        if (next - estimate).abs() < tol {
            return Ok(next);
        }
        estimate = next;
    }
    Err(CadError::NumericalFailure(format!(
        "trapezoidal rule did not reach tolerance {tol:e} with {intervals} intervals"
    )))
}
