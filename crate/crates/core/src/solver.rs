//! Primal-dual interior point solver for the compact block program
//!
//! ```text
//!   maximize   (1/n) Σ_r Z_r[c_r, c_r]
//!   subject to G - Φ(Z) ⪰ 0,  Z_r ⪰ 0
//! ```
//!
//! and its dual
//!
//! ```text
//!   minimize   ⟨G, Y⟩
//!   subject to Y ⪰ 0,  Y[window_r] - C_r ⪰ 0
//! ```
//!
//! with `C_r = (1/n) e_{c_r} e_{c_r}ᵀ`. Both sides have strictly feasible
//! points (`Z = εI` since `G ≻ 0`, `Y = I`), so the iteration starts
//! feasible and stays feasible: the dual slacks are *defined* as
//! `Y[window_r] - C_r`, and the primal slack `W` tracks `G - Φ(Z)`.
//!
//! Search directions use the HKM linearization `ΔX = σμS⁻¹ - X - sym(X ΔS S⁻¹)`
//! with a Mehrotra predictor-corrector and a common primal/dual step length. The Schur complement is assembled in
//! the orthonormal `svec` basis of `n x n` symmetric matrices.

use nalgebra::{Cholesky, DMatrix, DVector};
use serde::Serialize;

use crate::error::{CadError, Result};
use crate::matrix::{min_eigenvalue, SymMatrix};
use crate::problem::CadProblem;
use crate::structure::{adjoint_raw, forward_raw, BlockStructure, BlockVariable, Window};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Relative duality gap `(dual - primal) / max(1, |dual|)` at which to stop.
    pub gap_tol: f64,
    /// Bound on primal/dual residuals at termination.
    pub feas_tol: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { gap_tol: 1e-7, feas_tol: 1e-8, max_iter: 200 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    MaxIter,
    InfeasibleNumerics,
}

impl std::fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::MaxIter => "max_iter",
            SolveStatus::InfeasibleNumerics => "infeasible_numerics",
        })
    }
}

/// Objective values at the start of one iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterStats {
    pub primal_value: f64,
    pub dual_value: f64,
    pub mu: f64,
}

#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub structure: BlockStructure,
    pub z: BlockVariable,
    /// Dual matrix `Y`.
    pub y: SymMatrix,
    pub primal_value: f64,
    pub dual_value: f64,
    /// `dual_value - primal_value`.
    pub gap: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub iterations: usize,
    pub status: SolveStatus,
    pub history: Vec<IterStats>,
}

impl SdpSolution {
    pub fn relative_gap(&self) -> f64 {
        self.gap.abs() / self.dual_value.abs().max(1.0)
    }
}

/// Smallest eigenvalues of every cone appearing in the primal/dual pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CertificateReport {
    /// `λ_min(G - Φ(Z))`.
    pub primal_slack_min_eig: f64,
    /// `min_r λ_min(Z_r)`.
    pub primal_blocks_min_eig: f64,
    /// `λ_min(Y)`.
    pub dual_min_eig: f64,
    /// `min_r λ_min(Y[window_r] - C_r)`.
    pub dual_blocks_min_eig: f64,
    pub relative_gap: f64,
}

impl CertificateReport {
    /// Worst negative eigenvalue across all cones, as a positive number (0 if all PSD).
    pub fn max_violation(&self) -> f64 {
        [self.primal_slack_min_eig, self.primal_blocks_min_eig, self.dual_min_eig, self.dual_blocks_min_eig]
            .iter()
            .map(|v| (-v).max(0.0))
            .fold(0.0, f64::max)
    }
}

/// Recomputes every cone condition of a solution from scratch.
pub fn verify_certificate(problem: &CadProblem, sol: &SdpSolution) -> Result<CertificateReport> {
    let s = &sol.structure;
    let n = s.n;
    let slack = SymMatrix::from_matrix(problem.gram().as_matrix() - forward_raw(&sol.z.blocks, s))?;
    let mut primal_blocks = f64::INFINITY;
    for b in &sol.z.blocks {
        primal_blocks = primal_blocks.min(min_eigenvalue(&SymMatrix::from_matrix(b.clone())?)?);
    }
    let mut dual_blocks = f64::INFINITY;
    for (r, blk) in adjoint_raw(sol.y.as_matrix(), s).into_iter().enumerate() {
        let mut blk = blk;
        let c = s.centers[r];
        blk[(c, c)] -= 1.0 / n as f64;
        dual_blocks = dual_blocks.min(min_eigenvalue(&SymMatrix::from_matrix(blk)?)?);
    }
    let primal = sol.z.center_sum(s) / n as f64;
    let dual = problem.gram().dot(&sol.y);
    Ok(CertificateReport {
        primal_slack_min_eig: min_eigenvalue(&slack)?,
        primal_blocks_min_eig: primal_blocks,
        dual_min_eig: min_eigenvalue(&sol.y)?,
        dual_blocks_min_eig: dual_blocks,
        relative_gap: (dual - primal).abs() / dual.abs().max(1.0),
    })
}

/// Solves the compact program for `problem` with default options.
pub fn solve_cad(problem: &CadProblem) -> Result<SdpSolution> {
    solve_cad_with(problem, &SolverOptions::default())
}

pub fn solve_cad_with(problem: &CadProblem, opts: &SolverOptions) -> Result<SdpSolution> {
    let s = BlockStructure::new(problem.n(), problem.delta)?;
    Ipm::new(&s, problem.gram().as_matrix(), opts)?.run()
}

const STEP_FRACTION: f64 = 0.95;

/// Index map from the local `svec` coordinates of one cone block to the
/// global `svec` coordinates of `n x n` symmetric matrices.
struct ConeBlock {
    window: Window,
    /// Center entry carrying the objective weight `1/n`, or `None` for the slack block.
    center: Option<usize>,
    global: Vec<usize>,
}

struct Ipm<'a> {
    n: usize,
    gram: &'a DMatrix<f64>,
    structure: &'a BlockStructure,
    cones: Vec<ConeBlock>,
    opts: SolverOptions,
    /// Primal blocks: `Z_0..Z_{n-1}` followed by the slack `W`.
    x: Vec<DMatrix<f64>>,
    u: DMatrix<f64>,
}

/// Position of `(p, q)`, `p <= q`, in the packed upper triangle of an `n x n` matrix.
fn svec_index(n: usize, p: usize, q: usize) -> usize {
    debug_assert!(p <= q);
    p * n - p * (p + 1) / 2 + q
}

fn svec(m: &DMatrix<f64>) -> DVector<f64> {
    let n = m.nrows();
    let mut v = DVector::zeros(n * (n + 1) / 2);
    for p in 0..n {
        for q in p..n {
            let w = if p == q { 1.0 } else { std::f64::consts::SQRT_2 };
            v[svec_index(n, p, q)] = w * m[(p, q)];
        }
    }
    v
}

fn smat(v: &DVector<f64>, n: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    for p in 0..n {
        for q in p..n {
            let val = v[svec_index(n, p, q)];
            if p == q {
                m[(p, p)] = val;
            } else {
                m[(p, q)] = val / std::f64::consts::SQRT_2;
                m[(q, p)] = val / std::f64::consts::SQRT_2;
            }
        }
    }
    m
}

fn sym(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}

/// Largest `α` with `x + α d ⪰ 0`, for `x ≻ 0`.
fn max_step(x: &DMatrix<f64>, d: &DMatrix<f64>) -> Option<f64> {
    let chol = Cholesky::new(x.clone())?;
    let l = chol.l();
    let a = l.solve_lower_triangular(d)?;
    let b = l.solve_lower_triangular(&a.transpose())?;
    let lam = sym(b).symmetric_eigenvalues().min();
    Some(if lam >= 0.0 { f64::INFINITY } else { -1.0 / lam })
}

/// Factored Schur complement. Near the optimum `M` is badly conditioned, so a
/// failed factorization is retried with a small diagonal shift and solves are
/// polished by iterative refinement against the unshifted `M`.
struct SchurSystem {
    m: DMatrix<f64>,
    chol: Cholesky<f64, nalgebra::Dyn>,
}

impl SchurSystem {
    const REFINE_STEPS: usize = 3;

    fn factor(m: DMatrix<f64>) -> Option<Self> {
        if let Some(chol) = Cholesky::new(m.clone()) {
            return Some(Self { m, chol });
        }
        let scale = m.diagonal().amax().max(f64::MIN_POSITIVE);
        let mut shift = 1e-14 * scale;
        while shift <= 1e-6 * scale {
            let mut shifted = m.clone();
            for i in 0..m.nrows() {
                shifted[(i, i)] += shift;
            }
            if let Some(chol) = Cholesky::new(shifted) {
                return Some(Self { m, chol });
            }
            shift *= 100.0;
        }
        None
    }

    fn solve(&self, rhs: &DVector<f64>) -> DVector<f64> {
        let mut x = self.chol.solve(rhs);
        for _ in 0..Self::REFINE_STEPS {
            let r = rhs - &self.m * &x;
            x += self.chol.solve(&r);
        }
        x
    }
}

fn inverse_pd(x: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    Cholesky::new(x.clone()).map(|c| c.inverse())
}

/// `Σ tr(B_k X B_l Z)` over the two basis matrices, each given as `(a, b, weight)` terms
/// standing for `weight · e_a e_bᵀ`.
fn basis_terms(p: usize, q: usize) -> ([(usize, usize, f64); 2], usize) {
    if p == q {
        ([(p, p, 1.0), (0, 0, 0.0)], 1)
    } else {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        ([(p, q, h), (q, p, h)], 2)
    }
}

impl<'a> Ipm<'a> {
    fn new(structure: &'a BlockStructure, gram: &'a DMatrix<f64>, opts: &SolverOptions) -> Result<Self> {
        let n = structure.n;
        let mut cones: Vec<ConeBlock> = structure
            .windows
            .iter()
            .zip(&structure.centers)
            .map(|(&w, &c)| ConeBlock { window: w, center: Some(c), global: Vec::new() })
            .collect();
        cones.push(ConeBlock { window: Window { lo: 0, hi: n - 1 }, center: None, global: Vec::new() });
        for cone in &mut cones {
            let w = cone.window;
            for p in 0..w.len() {
                for q in p..w.len() {
                    cone.global.push(svec_index(n, w.lo + p, w.lo + q));
                }
            }
        }

        // Strictly feasible start: Z_r = εI with Φ(εI) ⪯ λ_min(G)/2, Y = I.
        let lam_min = gram.clone().symmetric_eigenvalues().min();
        if lam_min <= 0.0 {
            return Err(CadError::LinearDependence { min_eigenvalue: lam_min });
        }
        let eps = 0.5 * lam_min / (2 * structure.delta + 1) as f64;
        let mut x: Vec<DMatrix<f64>> = structure.block_sizes().map(|d| DMatrix::identity(d, d) * eps).collect();
        let w = gram - forward_raw(&x, structure);
        x.push(w);
        let u = DMatrix::identity(n, n);

        Ok(Self { n, gram, structure, cones, opts: *opts, x, u })
    }

    fn dual_slacks(&self, u: &DMatrix<f64>) -> Vec<DMatrix<f64>> {
        let inv_n = 1.0 / self.n as f64;
        self.cones
            .iter()
            .map(|cone| {
                let w = cone.window;
                let mut blk = u.view((w.lo, w.lo), (w.len(), w.len())).into_owned();
                if let Some(c) = cone.center {
                    blk[(c, c)] -= inv_n;
                }
                blk
            })
            .collect()
    }

    fn embed_sum(&self, blocks: &[DMatrix<f64>]) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.n, self.n);
        for (b, cone) in blocks.iter().zip(&self.cones) {
            let w = cone.window;
            let mut view = out.view_mut((w.lo, w.lo), (w.len(), w.len()));
            view += b;
        }
        out
    }

    fn primal_value(&self) -> f64 {
        self.x[..self.n].iter().zip(&self.structure.centers).map(|(b, &c)| b[(c, c)]).sum::<f64>() / self.n as f64
    }

    fn dual_value(&self) -> f64 {
        self.gram.dot(&self.u)
    }

    /// Schur complement `M_kl = Σ_b tr(B_k X_b B_l S_b⁻¹)` in global svec coordinates.
    fn schur(&self, s_inv: &[DMatrix<f64>]) -> DMatrix<f64> {
        let m = self.n * (self.n + 1) / 2;
        let mut schur = DMatrix::zeros(m, m);
        for ((cone, x), z) in self.cones.iter().zip(&self.x).zip(s_inv) {
            let d = cone.window.len();
            let pairs: Vec<(usize, usize)> = (0..d).flat_map(|p| (p..d).map(move |q| (p, q))).collect();
            for (k, &(p, q)) in pairs.iter().enumerate() {
                let (tk, nk) = basis_terms(p, q);
                let gk = cone.global[k];
                for (l, &(s, t)) in pairs.iter().enumerate().skip(k) {
                    let (tl, nl) = basis_terms(s, t);
                    let mut acc = 0.0;
                    for &(a, b, wk) in &tk[..nk] {
                        for &(c, e, wl) in &tl[..nl] {
                            acc += wk * wl * x[(b, c)] * z[(e, a)];
                        }
                    }
                    let gl = cone.global[l];
                    schur[(gk, gl)] += acc;
                    if gk != gl {
                        schur[(gl, gk)] += acc;
                    }
                }
            }
        }
        schur
    }

    /// Solves for `(ΔX, ΔU)` given the target `σμ` and second-order corrections.
    fn direction(
        &self,
        schur: &SchurSystem,
        s_inv: &[DMatrix<f64>],
        sigma_mu: f64,
        corrections: Option<&[DMatrix<f64>]>,
        rp: &DMatrix<f64>,
    ) -> (Vec<DMatrix<f64>>, DMatrix<f64>) {
        // base_b = σμ S_b⁻¹ - X_b - K_b
        let base: Vec<DMatrix<f64>> = self
            .x
            .iter()
            .zip(s_inv)
            .enumerate()
            .map(|(b, (x, si))| {
                let mut m = si * sigma_mu - x;
                if let Some(k) = corrections {
                    m -= &k[b];
                }
                m
            })
            .collect();
        let rhs = self.embed_sum(&base) - rp;
        let du = smat(&schur.solve(&svec(&rhs)), self.n);
        let mut dx: Vec<DMatrix<f64>> = self
            .cones
            .iter()
            .zip(&self.x)
            .zip(s_inv)
            .zip(base)
            .map(|(((cone, x), si), base)| {
                let w = cone.window;
                let ds = du.view((w.lo, w.lo), (w.len(), w.len()));
                base - sym(x * ds * si)
            })
            .collect();
        // The slack step absorbs the linear-solve error so that the primal
        // equality is restored exactly along the step.
        let n = self.n;
        let dw = rp - self.embed_sum(&dx[..n]);
        dx[n] = sym(dw);
        (dx, du)
    }

    fn step_lengths(&self, s: &[DMatrix<f64>], dx: &[DMatrix<f64>], du: &DMatrix<f64>) -> Option<(f64, f64)> {
        let mut ap = f64::INFINITY;
        for (x, d) in self.x.iter().zip(dx) {
            ap = ap.min(max_step(x, d)?);
        }
        let ds = self.dual_slacks_delta(du);
        let mut ad = f64::INFINITY;
        for (sb, d) in s.iter().zip(&ds) {
            ad = ad.min(max_step(sb, d)?);
        }
        Some((ap, ad))
    }

    fn dual_slacks_delta(&self, du: &DMatrix<f64>) -> Vec<DMatrix<f64>> {
        self.cones
            .iter()
            .map(|cone| {
                let w = cone.window;
                du.view((w.lo, w.lo), (w.len(), w.len())).into_owned()
            })
            .collect()
    }

    fn run(mut self) -> Result<SdpSolution> {
        let nu: usize = self.cones.iter().map(|c| c.window.len()).sum();
        let mut history = Vec::new();
        let mut status = SolveStatus::MaxIter;
        let mut iterations = 0;

        loop {
            let s = self.dual_slacks(&self.u);
            let rp = self.gram - self.embed_sum(&self.x);
            let pobj = self.primal_value();
            let dobj = self.dual_value();
            let mu = self.x.iter().zip(&s).map(|(x, sb)| x.dot(sb)).sum::<f64>() / nu as f64;
            history.push(IterStats { primal_value: pobj, dual_value: dobj, mu });

            let rel_gap = (dobj - pobj).abs() / dobj.abs().max(1.0);
            if rel_gap <= self.opts.gap_tol && rp.amax() <= self.opts.feas_tol {
                status = SolveStatus::Optimal;
                break;
            }
            if iterations >= self.opts.max_iter {
                break;
            }
            iterations += 1;

            let Some(s_inv) = s.iter().map(inverse_pd).collect::<Option<Vec<_>>>() else {
                status = SolveStatus::InfeasibleNumerics;
                break;
            };
            let Some(schur) = SchurSystem::factor(self.schur(&s_inv)) else {
                status = SolveStatus::InfeasibleNumerics;
                break;
            };

            // predictor
            let (dx_a, du_a) = self.direction(&schur, &s_inv, 0.0, None, &rp);
            let Some((ap, ad)) = self.step_lengths(&s, &dx_a, &du_a) else {
                status = SolveStatus::InfeasibleNumerics;
                break;
            };
            let (ap, ad) = (ap.min(1.0), ad.min(1.0));
            let ds_a = self.dual_slacks_delta(&du_a);
            let mu_aff = self
                .x
                .iter()
                .zip(&dx_a)
                .zip(s.iter().zip(&ds_a))
                .map(|((x, dx), (sb, ds))| (x + dx * ap).dot(&(sb + ds * ad)))
                .sum::<f64>()
                / nu as f64;
            let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

            // corrector: K_b = sym(ΔX_a ΔS_a S_b⁻¹)
            let corr: Vec<DMatrix<f64>> =
                dx_a.iter().zip(&ds_a).zip(&s_inv).map(|((dx, ds), si)| sym(dx * ds * si)).collect();
            let (dx, du) = self.direction(&schur, &s_inv, sigma * mu, Some(&corr), &rp);
            let Some((ap, ad)) = self.step_lengths(&s, &dx, &du) else {
                status = SolveStatus::InfeasibleNumerics;
                break;
            };
            // A common step length keeps the iterates centred; separate primal
            // and dual steps stall on degenerate instances near the optimum.
            let alpha = (STEP_FRACTION * ap.min(ad)).min(1.0);
            if alpha < 1e-12 {
                status = SolveStatus::InfeasibleNumerics;
                break;
            }
            for (x, d) in self.x.iter_mut().zip(&dx) {
                *x += d * alpha;
                let sx = sym(x.clone());
                *x = sx;
            }
            self.u += du * alpha;
            let su = sym(self.u.clone());
            self.u = su;
        }

        let n = self.n;
        let primal_value = self.primal_value();
        let dual_value = self.dual_value();
        let primal_residual = (self.gram - self.embed_sum(&self.x)).amax();
        let mut x = self.x;
        x.truncate(n);
        Ok(SdpSolution {
            structure: self.structure.clone(),
            z: BlockVariable { blocks: x },
            y: SymMatrix::from_matrix(self.u)?,
            primal_value,
            dual_value,
            gap: dual_value - primal_value,
            primal_residual,
            // dual slacks are defined from Y, so the dual equality holds exactly
            dual_residual: 0.0,
            iterations,
            status,
            history,
        })
    }
}
