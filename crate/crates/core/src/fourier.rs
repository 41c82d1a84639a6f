//! Fourier coefficients of `μ(θ, c) = (1 - 2c cos θ + c²)^{-1/2}` and the
//! check that they decay at least like `M(c)·c^k` with `M(c) = ∫ μ dθ`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{CadError, Result};
use crate::quadrature::trapezoid_doubling;

pub const DEFAULT_K_MAX: usize = 40;

/// Coefficients smaller than this are round-off and are never flagged.
pub const ZERO_COEFFICIENT: f64 = 1e-14;

const QUAD_TOL: f64 = 1e-13;
const BOUND_SLACK: f64 = 1e-8;

pub fn mu(theta: f64, c: f64) -> Result<f64> {
    check_c(c)?;
    let base = 1.0 - 2.0 * c * theta.cos() + c * c;
    if base <= 0.0 {
        return Err(CadError::BadInput(format!("μ(θ = {theta}, c = {c}) is singular")));
    }
    Ok(base.sqrt().recip())
}

fn check_c(c: f64) -> Result<()> {
    if !(0.0..1.0).contains(&c) {
        return Err(CadError::BadInput(format!("overlap c = {c} must lie in [0, 1)")));
    }
    Ok(())
}

fn min_intervals(k: usize) -> usize {
    64 + 8 * k
}

/// `∫_{-π}^{π} μ(θ, c) e^{ikθ} dθ`; the sine part vanishes since `μ` is even.
pub fn mu_hat(k: usize, c: f64) -> Result<f64> {
    check_c(c)?;
    let kf = k as f64;
    trapezoid_doubling(
        |t| (1.0 - 2.0 * c * t.cos() + c * c).sqrt().recip() * (kf * t).cos(),
        -PI,
        PI,
        QUAD_TOL,
        min_intervals(k),
    )
}

/// `μ(θ) ≈ (1/2π)[μ̂(0) + 2 Σ_{k≥1} μ̂(k) cos kθ]` from the given coefficients.
pub fn fourier_partial_sum(coefficients: &[f64], theta: f64) -> f64 {
    let tail: f64 = coefficients.iter().enumerate().skip(1).map(|(k, a)| a * (k as f64 * theta).cos()).sum();
    (coefficients.first().copied().unwrap_or(0.0) + 2.0 * tail) / (2.0 * PI)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FourierCheck {
    pub c: f64,
    /// `μ̂(k, c)` for `k = 0..=k_max`.
    pub coefficients: Vec<f64>,
    /// `M(c) = μ̂(0, c)`.
    pub m0: f64,
    /// Indices where `|μ̂(k)| > M(c)·c^k`.
    pub violations: Vec<usize>,
}

impl FourierCheck {
    pub fn bound(&self, k: usize) -> f64 {
        self.m0 * (k as f64 * self.c.ln()).exp()
    }
}

pub fn decay_check(c: f64, k_max: usize) -> Result<FourierCheck> {
    if !(c > 0.0 && c < 1.0) {
        return Err(CadError::BadInput(format!("decay check needs 0 < c < 1, got {c}")));
    }
    let coefficients = (0..=k_max).map(|k| mu_hat(k, c)).collect::<Result<Vec<_>>>()?;
    let m0 = coefficients[0];
    let ln_c = c.ln();
    let violations = coefficients
        .iter()
        .enumerate()
        .filter(|&(k, &v)| v.abs() >= ZERO_COEFFICIENT && v.abs() > m0 * (k as f64 * ln_c).exp() * (1.0 + BOUND_SLACK))
        .map(|(k, _)| k)
        .collect();
    Ok(FourierCheck { c, coefficients, m0, violations })
}
