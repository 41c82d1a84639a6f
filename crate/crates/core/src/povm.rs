//! From a solved block program back to a measurement.
//!
//! The states are realized as the columns of `S = √G`, so the operators
//! live in an `n`-dimensional space and `E_r = S⁻¹ Embed_r(Z_r) S⁻¹`.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{CadError, Result};
use crate::matrix::{inverse_pd, min_eigenvalue, sqrt_psd, SymMatrix};
use crate::problem::CadProblem;
use crate::solver::SdpSolution;
use crate::structure::{embed_block, BlockStructure};

/// Condition number of `√G` beyond which reconstruction is refused.
pub const MAX_SQRT_CONDITION: f64 = 1e12;

const UNITARITY_TOL: f64 = 1e-8;
const SAMPLING_TOL: f64 = 1e-6;

/// Success, error and inconclusive probabilities under uniform priors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProbBreakdown {
    pub ps: f64,
    pub pe: f64,
    pub pi: f64,
}

pub fn probabilities(sol: &SdpSolution, s: &BlockStructure) -> ProbBreakdown {
    let n = s.n as f64;
    let mut ps = 0.0;
    let mut pe = 0.0;
    for (b, &c) in sol.z.blocks.iter().zip(&s.centers) {
        for j in 0..b.nrows() {
            if j == c {
                ps += b[(j, j)];
            } else {
                pe += b[(j, j)];
            }
        }
    }
    ps /= n;
    pe /= n;
    let mut pi = 1.0 - ps - pe;
    if (-UNITARITY_TOL..0.0).contains(&pi) {
        pi = 0.0;
    }
    ProbBreakdown { ps, pe, pi }
}

/// Measurement operators on the span of the states, plus the inconclusive element.
#[derive(Debug, Clone)]
pub struct PovmRealization {
    pub elements: Vec<SymMatrix>,
    pub inconclusive: SymMatrix,
    /// `S = √G`; column `k` is state `k`.
    pub states: SymMatrix,
}

impl PovmRealization {
    pub fn n(&self) -> usize {
        self.elements.len()
    }

    /// `⟨Ψ_k|E|Ψ_k⟩ = (S E S)[k, k]`.
    fn expectation(&self, e: &SymMatrix, k: usize) -> f64 {
        let s = self.states.as_matrix().column(k);
        (s.transpose() * e.as_matrix() * s)[(0, 0)]
    }

    /// Outcome distribution given state `k0` (0-based): index 0 is the
    /// inconclusive outcome, index `r + 1` is answer `r`.
    pub fn outcome_probabilities(&self, k0: usize) -> Vec<f64> {
        std::iter::once(&self.inconclusive).chain(&self.elements).map(|e| self.expectation(e, k0)).collect()
    }

    /// Smallest eigenvalue over all elements including `E₀`.
    pub fn min_eigenvalue(&self) -> Result<f64> {
        let mut lo = min_eigenvalue(&self.inconclusive)?;
        for e in &self.elements {
            lo = lo.min(min_eigenvalue(e)?);
        }
        Ok(lo)
    }

    /// Largest `|⟨Ψ_i|E_r|Ψ_i⟩|` over forbidden pairs `|i - r| > delta`.
    pub fn structural_zero_violation(&self, delta: usize) -> f64 {
        let n = self.n();
        let mut worst: f64 = 0.0;
        for (r, e) in self.elements.iter().enumerate() {
            for i in (0..n).filter(|i| i.abs_diff(r) > delta) {
                worst = worst.max(self.expectation(e, i).abs());
            }
        }
        worst
    }

    pub fn validate(&self, tol: f64) -> Result<()> {
        let lo = self.min_eigenvalue()?;
        if lo < -tol {
            return Err(CadError::BadPovm(format!("element with eigenvalue {lo:e}")));
        }
        Ok(())
    }
}

pub fn reconstruct_povm(sol: &SdpSolution, problem: &CadProblem) -> Result<PovmRealization> {
    let s = &sol.structure;
    if s.n != problem.n() {
        return Err(CadError::BadShape(format!("solution has {} blocks, problem has {} states", s.n, problem.n())));
    }
    let sqrt_g = sqrt_psd(problem.gram())?;
    let s_inv = inverse_pd(&sqrt_g, MAX_SQRT_CONDITION)?;
    let si = s_inv.as_matrix();
    let n = s.n;
    let mut total = DMatrix::zeros(n, n);
    let mut elements = Vec::with_capacity(n);
    for (b, &w) in sol.z.blocks.iter().zip(&s.windows) {
        let e = si * embed_block(b, w, n) * si;
        total += &e;
        elements.push(SymMatrix::from_matrix(e)?);
    }
    let inconclusive = SymMatrix::from_matrix(DMatrix::identity(n, n) - total)?;
    Ok(PovmRealization { elements, inconclusive, states: sqrt_g })
}

/// Samples `trials` outcomes for true state `k0` (0-based) and returns the
/// histogram over `{inconclusive, answer 0, …, answer n-1}`.
///
/// Sampling uses ChaCha8 seeded with `seed` via `seed_from_u64`; each trial
/// draws one uniform `f64` and inverts the cumulative distribution, so the
/// result is reproducible across platforms.
pub fn simulate_outcomes(povm: &PovmRealization, k0: usize, trials: u64, seed: u64) -> Result<Vec<u64>> {
    if k0 >= povm.n() {
        return Err(CadError::BadInput(format!("state index {k0} out of range for n = {}", povm.n())));
    }
    let probs = povm.outcome_probabilities(k0);
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > SAMPLING_TOL {
        return Err(CadError::BadPovm(format!("outcome probabilities sum to {total}")));
    }
    if let Some(p) = probs.iter().find(|&&p| p < -SAMPLING_TOL) {
        return Err(CadError::BadPovm(format!("negative outcome probability {p:e}")));
    }
    let mut cdf = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for p in &probs {
        acc += p.max(0.0);
        cdf.push(acc);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hist = vec![0u64; probs.len()];
    for _ in 0..trials {
        let u: f64 = rng.gen::<f64>() * acc;
        let idx = cdf.partition_point(|&c| c <= u).min(probs.len() - 1);
        hist[idx] += 1;
    }
    Ok(hist)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::solve_cad;
    use approx::assert_abs_diff_eq;

    #[test]
    fn orthogonal_states_give_projective_measurement() {
        for delta in 0..3 {
            let problem = CadProblem::qcp(3, 0.0, delta).unwrap();
            let sol = solve_cad(&problem).unwrap();
            let povm = reconstruct_povm(&sol, &problem).unwrap();
            for (r, e) in povm.elements.iter().enumerate() {
                for i in 0..3 {
                    for j in 0..3 {
                        let want = if i == r && j == r { 1.0 } else { 0.0 };
                        assert_abs_diff_eq!(e[(i, j)], want, epsilon = 1e-6);
                    }
                }
            }
            assert!(povm.inconclusive.max_abs() < 1e-6);
        }
    }

    #[test]
    fn two_state_unambiguous_measurement() {
        let problem = CadProblem::qcp(2, 0.6, 0).unwrap();
        let sol = solve_cad(&problem).unwrap();
        let povm = reconstruct_povm(&sol, &problem).unwrap();
        let p1 = povm.outcome_probabilities(1);
        assert!(p1[1].abs() <= 1e-8);
        let p0 = povm.outcome_probabilities(0);
        assert_abs_diff_eq!(p0[1], 0.4, epsilon = 1e-6);
        let pr = probabilities(&sol, &sol.structure);
        assert_eq!(pr.pe, 0.0);
        assert_abs_diff_eq!(pr.pi, 0.6, epsilon = 1e-6);
    }

    #[test]
    fn simulation_is_deterministic_and_concentrated() {
        let problem = CadProblem::qcp(3, 0.0, 1).unwrap();
        let sol = solve_cad(&problem).unwrap();
        let povm = reconstruct_povm(&sol, &problem).unwrap();
        let hist = simulate_outcomes(&povm, 2, 1000, 7).unwrap();
        assert_eq!(hist[3], 1000);

        let problem = CadProblem::qcp(2, 0.6, 0).unwrap();
        let sol = solve_cad(&problem).unwrap();
        let povm = reconstruct_povm(&sol, &problem).unwrap();
        let a = simulate_outcomes(&povm, 0, 100_000, 42).unwrap();
        let b = simulate_outcomes(&povm, 0, 100_000, 42).unwrap();
        assert_eq!(a, b);
        let freq = a[1] as f64 / 1e5;
        assert!((freq - 0.4).abs() < 0.01, "{freq}");
        assert!(simulate_outcomes(&povm, 5, 10, 0).is_err());
    }

    #[test]
    fn sampling_rejects_non_normalized_povm() {
        let bad = PovmRealization {
            elements: vec![SymMatrix::identity(2), SymMatrix::identity(2)],
            inconclusive: SymMatrix::zeros(2),
            states: SymMatrix::identity(2),
        };
        assert!(matches!(simulate_outcomes(&bad, 0, 10, 1), Err(CadError::BadPovm(_))));
    }
}
