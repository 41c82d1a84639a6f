//! Square-root measurement baseline.
//!
//! With `S = √G`, the square-root measurement answers `k` with probability
//! `S[k0, k]²` when the true state is `k0`, and the block variable it induces
//! is `Z^ME_i = s_i s_iᵀ` with `s_i` the `i`-th column of `S`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{CadError, Result};
use crate::matrix::{sqrt_psd, SymMatrix};
use crate::quadrature::trapezoid_doubling;

#[derive(Debug, Clone)]
pub struct SrmData {
    /// `S = √G`.
    pub s: SymMatrix,
    /// `(1/n) Σ_i S[i,i]²`.
    pub ps_me: f64,
}

impl SrmData {
    pub fn n(&self) -> usize {
        self.s.n()
    }
}

pub fn srm(gram: &SymMatrix) -> Result<SrmData> {
    let s = sqrt_psd(gram)?;
    let n = s.n();
    let ps_me = (0..n).map(|i| s[(i, i)].powi(2)).sum::<f64>() / n as f64;
    Ok(SrmData { s, ps_me })
}

/// `[Z^ME_i]_{j,k} = S[j,i]·S[k,i]` (0-based).
pub fn zme_entry(srm: &SrmData, i: usize, j: usize, k: usize) -> f64 {
    srm.s[(j, i)] * srm.s[(k, i)]
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutcomeProfile {
    /// True state (0-based).
    pub k0: usize,
    /// `probs[k] = S[k0, k]²`.
    pub probs: Vec<f64>,
    /// `k - k0` for each entry of `probs`.
    pub delta_axis: Vec<i64>,
}

impl OutcomeProfile {
    /// Probability of answering at signed distance `offset` from the truth.
    pub fn at_offset(&self, offset: i64) -> Option<f64> {
        self.delta_axis.iter().position(|&d| d == offset).map(|k| self.probs[k])
    }
}

pub fn outcome_profile(srm: &SrmData, k0: usize) -> Result<OutcomeProfile> {
    let n = srm.n();
    if k0 >= n {
        return Err(CadError::BadInput(format!("state index {k0} out of range for n = {n}")));
    }
    Ok(OutcomeProfile {
        k0,
        probs: (0..n).map(|k| srm.s[(k0, k)].powi(2)).collect(),
        delta_axis: (0..n).map(|k| k as i64 - k0 as i64).collect(),
    })
}

/// Integral approximation to `S[k,l]` for the change-point Gram matrix
/// (1-based `k`, `l`, semi-infinite chain):
///
/// ```text
/// S[k,l] ≈ (2√(1-c²)/π) ∫_0^π (sin kθ - c sin(k-1)θ)(sin lθ - c sin(l-1)θ)
///                                / (1 - 2c cos θ + c²)^{3/2} dθ
/// ```
///
/// Diagnostic only; exact square roots always come from [`sqrt_psd`].
pub fn qcp_srm_integral(k: usize, l: usize, c: f64) -> Result<f64> {
    if k == 0 || l == 0 {
        return Err(CadError::BadInput("indices are 1-based".into()));
    }
    if !(c > 0.0 && c < 1.0) {
        return Err(CadError::BadInput(format!("overlap c = {c} must lie in (0, 1)")));
    }
    let (kf, lf) = (k as f64, l as f64);
    let integrand = |t: f64| {
        let a = (kf * t).sin() - c * ((kf - 1.0) * t).sin();
        let b = (lf * t).sin() - c * ((lf - 1.0) * t).sin();
        a * b / (1.0 - 2.0 * c * t.cos() + c * c).powf(1.5)
    };
    let integral = trapezoid_doubling(integrand, 0.0, PI, 1e-12, 64 + 8 * (k + l))?;
    Ok(2.0 * (1.0 - c * c).sqrt() / PI * integral)
}
