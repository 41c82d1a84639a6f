//! Lower bounds on the optimal success probability built from the
//! square-root measurement.
//!
//! A feasible point of the program is obtained by keeping the `Z^ME`
//! diagonal and subtracting, at each site, what a 2x2 principal minor of
//! `Z^ME - Z` forces away: with probe index `j` one step outside the window,
//! `H_i = 2|Z^ME_i[i,j]| - Z^ME_i[j,j]`. Sites in the first half of the chain
//! probe forward (`j = i + Δ + 1`), the rest backward (`j = i - Δ - 1`).

use serde::Serialize;

use crate::error::{CadError, Result};
use crate::problem::qsad_params;
use crate::srm::{zme_entry, SrmData};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Backward,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundResult {
    pub value: f64,
    /// `Z^ME_i[i,i] - H_i` per site.
    pub per_site_terms: Vec<f64>,
    pub h_terms: Vec<f64>,
}

/// Probe index one step outside the window of site `i`, if it exists.
fn probe(n: usize, i: usize, delta: usize, direction: Direction) -> Option<usize> {
    match direction {
        Direction::Forward => Some(i + delta + 1).filter(|&j| j < n),
        Direction::Backward => i.checked_sub(delta + 1),
    }
}

/// `H_i` for site `i` (0-based); zero when the probe index falls off the chain.
pub fn h_term(srm: &SrmData, i: usize, delta: usize, direction: Direction) -> f64 {
    match probe(srm.n(), i, delta, direction) {
        Some(j) => 2.0 * zme_entry(srm, i, i, j).abs() - zme_entry(srm, i, j, j),
        None => 0.0,
    }
}

pub fn general_lower_bound(srm: &SrmData, delta: usize) -> Result<BoundResult> {
    general_lower_bound_with(srm, delta, false)
}

/// As [`general_lower_bound`]; with `clamp` each per-site term is floored at zero.
pub fn general_lower_bound_with(srm: &SrmData, delta: usize, clamp: bool) -> Result<BoundResult> {
    let n = srm.n();
    if delta >= n {
        return Err(CadError::BadDelta { n, delta });
    }
    let half = n.div_ceil(2);
    let h_terms: Vec<f64> = (0..n)
        .map(|i| {
            let dir = if i < half { Direction::Forward } else { Direction::Backward };
            h_term(srm, i, delta, dir)
        })
        .collect();
    let per_site_terms: Vec<f64> = h_terms
        .iter()
        .enumerate()
        .map(|(i, h)| {
            let t = zme_entry(srm, i, i, i) - h;
            if clamp {
                t.max(0.0)
            } else {
                t
            }
        })
        .collect();
    let value = per_site_terms.iter().sum::<f64>() / n as f64;
    Ok(BoundResult { value, per_site_terms, h_terms })
}

/// Change-point closed form `(1 - 2c·c^Δ + c²·c^{2Δ})·P^ME = (1 - c^{Δ+1})²·P^ME`.
pub fn qcp_bound(c: f64, delta: usize, ps_me: f64) -> f64 {
    if c <= 0.0 {
        return ps_me;
    }
    let decay = (delta as f64 * c.ln()).exp();
    (1.0 - 2.0 * c * decay + c * c * decay * decay) * ps_me
}

/// Anomaly-detection piecewise bound: `1-c²` below `⌊n/2⌋`, then a linear
/// interpolation towards `a²` with weight `(2d+1)/n` (odd `n`) or `2d/n`
/// (even `n`), `d = Δ - ⌊n/2⌋`.
pub fn qsad_bound(n: usize, c: f64, delta: usize) -> Result<f64> {
    if delta >= n {
        return Err(CadError::BadDelta { n, delta });
    }
    let p = qsad_params(n, c)?;
    let half = n / 2;
    if delta < half {
        return Ok(p.ps_ua());
    }
    let d = delta - half;
    let weight = if n % 2 == 1 { 2 * d + 1 } else { 2 * d } as f64 / n as f64;
    Ok((1.0 - weight) * p.ps_ua() + weight * p.ps_me())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{min_eigenvalue, SymMatrix};
    use crate::problem::{gram_qsad, qsad_params};
    use crate::srm::srm;
    use approx::assert_abs_diff_eq;

    #[test]
    fn h_term_cases() {
        let id = srm(&SymMatrix::identity(5)).unwrap();
        for i in 0..5 {
            assert_eq!(h_term(&id, i, 1, Direction::Forward), 0.0);
        }
        let d = srm(&gram_qsad(25, 0.6).unwrap()).unwrap();
        let p = qsad_params(25, 0.6).unwrap();
        let h = h_term(&d, 5, 3, Direction::Forward);
        assert_abs_diff_eq!(h, 2.0 * p.a * p.b - p.b * p.b, epsilon = 1e-12);
        assert_abs_diff_eq!(h, 0.156_009_06, epsilon = 1e-8);
        assert_eq!(h_term(&d, 24, 0, Direction::Forward), 0.0);
        assert_eq!(h_term(&d, 0, 0, Direction::Backward), 0.0);
    }

    #[test]
    fn general_bound_examples() {
        let id = srm(&SymMatrix::identity(7)).unwrap();
        for delta in 0..7 {
            assert_abs_diff_eq!(general_lower_bound(&id, delta).unwrap().value, 1.0, epsilon = 1e-15);
        }
        let d = srm(&gram_qsad(25, 0.6).unwrap()).unwrap();
        let b = general_lower_bound(&d, 0).unwrap();
        assert_abs_diff_eq!(b.value, 0.64, epsilon = 1e-12);
        let sum: f64 = b.per_site_terms.iter().sum();
        assert_abs_diff_eq!(b.value, sum / 25.0, epsilon = 1e-12);
        assert!(general_lower_bound(&d, 25).is_err());
    }

    #[test]
    fn clamped_variant_dominates() {
        let d = srm(&crate::problem::gram_qcp(9, 0.9).unwrap()).unwrap();
        for delta in 0..9 {
            let raw = general_lower_bound(&d, delta).unwrap();
            let clamped = general_lower_bound_with(&d, delta, true).unwrap();
            assert!(clamped.value >= raw.value);
            assert!(clamped.per_site_terms.iter().all(|&t| t >= 0.0));
        }
    }

    #[test]
    fn qcp_bound_forms() {
        assert_abs_diff_eq!(qcp_bound(0.6, 1, 0.66), 0.270_336, epsilon = 1e-12);
        assert_abs_diff_eq!(qcp_bound(1e-12, 0, 0.8), 0.8, epsilon = 1e-10);
        let mut prev = 0.0;
        for delta in 0..30 {
            let v = qcp_bound(0.6, delta, 0.8);
            assert!(v > prev && v < 0.8);
            prev = v;
        }
    }

    #[test]
    fn qsad_bound_regimes() {
        let p = qsad_params(25, 0.6).unwrap();
        assert_abs_diff_eq!(qsad_bound(25, 0.6, 5).unwrap(), 0.64, epsilon = 1e-12);
        let at_half = qsad_bound(25, 0.6, 12).unwrap();
        assert_abs_diff_eq!(at_half, 24.0 / 25.0 * 0.64 + p.ps_me() / 25.0, epsilon = 1e-12);
        assert_abs_diff_eq!(at_half, 0.646_24, epsilon = 1e-5);
        // d = 12 gives weight (2d+1)/n = 1: the bound reaches the minimum-error value
        assert_abs_diff_eq!(qsad_bound(25, 0.6, 24).unwrap(), p.ps_me(), epsilon = 1e-12);
        let g = gram_qsad(25, 0.6).unwrap();
        assert_abs_diff_eq!(qsad_bound(25, 0.6, 0).unwrap(), min_eigenvalue(&g).unwrap(), epsilon = 1e-9);
    }
}
