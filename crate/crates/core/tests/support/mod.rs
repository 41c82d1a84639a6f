//! Test-only oracles that share no code path with the block solver.

#![allow(dead_code)]

use nalgebra::{Cholesky, DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Generic standard-form SDP over a product of PSD blocks:
/// `min Σ_b ⟨C_b, X_b⟩  s.t.  Σ_b ⟨A_kb, X_b⟩ = b_k,  X_b ⪰ 0`.
pub struct DenseSdp {
    pub block_sizes: Vec<usize>,
    pub cost: Vec<DMatrix<f64>>,
    /// `constraints[k][b]` is the block-`b` part of constraint `k`.
    pub constraints: Vec<Vec<DMatrix<f64>>>,
    pub rhs: Vec<f64>,
}

pub struct DenseSolution {
    pub primal: f64,
    pub dual: f64,
    pub primal_infeasibility: f64,
    pub iterations: usize,
}

fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

fn boundary_step(x: &DMatrix<f64>, d: &DMatrix<f64>) -> f64 {
    let l = Cholesky::new(x.clone()).expect("iterate left the cone").l();
    let li = l.clone().try_inverse().unwrap();
    let m = symmetrize(&(&li * d * li.transpose()));
    let lam = m.symmetric_eigenvalues().min();
    if lam >= 0.0 {
        f64::INFINITY
    } else {
        -1.0 / lam
    }
}

impl DenseSdp {
    fn apply(&self, x: &[DMatrix<f64>]) -> DVector<f64> {
        DVector::from_iterator(
            self.constraints.len(),
            self.constraints.iter().map(|a| a.iter().zip(x).map(|(ab, xb)| ab.dot(xb)).sum::<f64>()),
        )
    }

    fn adjoint(&self, y: &DVector<f64>) -> Vec<DMatrix<f64>> {
        let mut out: Vec<DMatrix<f64>> = self.block_sizes.iter().map(|&d| DMatrix::zeros(d, d)).collect();
        for (a, &yk) in self.constraints.iter().zip(y.iter()) {
            for (o, ab) in out.iter_mut().zip(a) {
                *o += ab * yk;
            }
        }
        out
    }

    /// Infeasible-start predictor-corrector with the HKM direction.
    pub fn solve(&self, tol: f64, max_iter: usize) -> DenseSolution {
        let m = self.constraints.len();
        let nu: usize = self.block_sizes.iter().sum();
        let b = DVector::from_vec(self.rhs.clone());
        let mut x: Vec<DMatrix<f64>> = self.block_sizes.iter().map(|&d| DMatrix::identity(d, d) * 10.0).collect();
        let mut s: Vec<DMatrix<f64>> = x.clone();
        let mut y = DVector::zeros(m);
        let mut iterations = 0;
        loop {
            let rp = &b - self.apply(&x);
            let aty = self.adjoint(&y);
            let rd: Vec<DMatrix<f64>> = self.cost.iter().zip(&aty).zip(&s).map(|((c, a), sb)| c - a - sb).collect();
            let pobj: f64 = self.cost.iter().zip(&x).map(|(c, xb)| c.dot(xb)).sum();
            let dobj = b.dot(&y);
            let mu: f64 = x.iter().zip(&s).map(|(a, c)| a.dot(c)).sum::<f64>() / nu as f64;
            let rd_norm = rd.iter().map(|r| r.amax()).fold(0.0, f64::max);
            let gap = (pobj - dobj).abs() / (1.0 + pobj.abs());
            if (gap < tol && rp.amax() < tol && rd_norm < tol) || iterations >= max_iter {
                return DenseSolution { primal: pobj, dual: dobj, primal_infeasibility: rp.amax(), iterations };
            }
            iterations += 1;

            let s_inv: Vec<DMatrix<f64>> =
                s.iter().map(|sb| Cholesky::new(sb.clone()).expect("dual left the cone").inverse()).collect();
            // Schur complement M_kl = Σ_b tr(A_kb X_b A_lb S_b⁻¹)
            let mut schur = DMatrix::zeros(m, m);
            for l in 0..m {
                let mapped: Vec<DMatrix<f64>> =
                    self.constraints[l].iter().zip(&x).zip(&s_inv).map(|((al, xb), si)| xb * al * si).collect();
                for k in 0..m {
                    schur[(k, l)] = self.constraints[k].iter().zip(&mapped).map(|(ak, p)| ak.dot(p)).sum::<f64>();
                }
            }
            let schur = symmetrize(&schur);
            let chol = Cholesky::new(schur).expect("Schur complement not positive definite");

            let direction = |sigma_mu: f64, corr: Option<&[DMatrix<f64>]>| {
                // ΔX = σμS⁻¹ - X - K - sym(X ΔS S⁻¹),  ΔS = Rd - A*Δy
                let base: Vec<DMatrix<f64>> = x
                    .iter()
                    .zip(&s_inv)
                    .zip(&rd)
                    .enumerate()
                    .map(|(i, ((xb, si), r))| {
                        let mut t = si * sigma_mu - xb - symmetrize(&(xb * r * si));
                        if let Some(k) = corr {
                            t -= &k[i];
                        }
                        t
                    })
                    .collect();
                let rhs = &rp - self.apply(&base);
                let dy = chol.solve(&rhs);
                let atdy = self.adjoint(&dy);
                let ds: Vec<DMatrix<f64>> = rd.iter().zip(&atdy).map(|(r, a)| r - a).collect();
                let dx: Vec<DMatrix<f64>> = x
                    .iter()
                    .zip(&s_inv)
                    .zip(&ds)
                    .enumerate()
                    .map(|(i, ((xb, si), d))| {
                        let mut t = si * sigma_mu - xb - symmetrize(&(xb * d * si));
                        if let Some(k) = corr {
                            t -= &k[i];
                        }
                        t
                    })
                    .collect();
                (dx, dy, ds)
            };
            let steps = |dx: &[DMatrix<f64>], ds: &[DMatrix<f64>]| {
                let ap = x.iter().zip(dx).map(|(a, d)| boundary_step(a, d)).fold(f64::INFINITY, f64::min);
                let ad = s.iter().zip(ds).map(|(a, d)| boundary_step(a, d)).fold(f64::INFINITY, f64::min);
                (ap, ad)
            };

            let (dxa, _, dsa) = direction(0.0, None);
            let (ap, ad) = steps(&dxa, &dsa);
            let (ap, ad) = (ap.min(1.0), ad.min(1.0));
            let mu_aff: f64 = x
                .iter()
                .zip(&dxa)
                .zip(s.iter().zip(&dsa))
                .map(|((xb, dx), (sb, ds))| (xb + dx * ap).dot(&(sb + ds * ad)))
                .sum::<f64>()
                / nu as f64;
            let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);
            let corr: Vec<DMatrix<f64>> =
                dxa.iter().zip(&dsa).zip(&s_inv).map(|((dx, ds), si)| symmetrize(&(dx * ds * si))).collect();
            let (dx, dy, ds) = direction(sigma * mu, Some(&corr));
            let (ap, ad) = steps(&dx, &ds);
            let (ap, ad) = ((0.95 * ap).min(1.0), (0.95 * ad).min(1.0));
            for (xb, d) in x.iter_mut().zip(&dx) {
                *xb = symmetrize(&(&*xb + d * ap));
            }
            for (sb, d) in s.iter_mut().zip(&ds) {
                *sb = symmetrize(&(&*sb + d * ad));
            }
            y += dy * ad;
        }
    }
}

/// Optimal success probability of the discrimination problem in its
/// original form: POVM elements `E_0..E_n` acting on the span of the states,
/// `⟨Ψ_j|E_i|Ψ_j⟩ = 0` for `|i-j| > delta`, `Σ E = I`, maximize
/// `(1/n) Σ ⟨Ψ_i|E_i|Ψ_i⟩`. The states are the rows of the Cholesky factor
/// of the Gram matrix.
///
/// Since `E_i ⪰ 0`, the zero constraints confine `E_i` to the orthogonal
/// complement of its forbidden states, so `E_i = Q_i F_i Q_iᵀ` with `Q_i` an
/// orthonormal basis of that complement. This keeps a strictly feasible point.
pub fn full_variable_optimum(gram: &DMatrix<f64>, delta: usize) -> DenseSolution {
    let n = gram.nrows();
    let l = Cholesky::new(gram.clone()).expect("Gram matrix must be positive definite").l();
    let states: Vec<DVector<f64>> = (0..n).map(|i| l.row(i).transpose()).collect();

    let mut bases = Vec::new();
    for r in 0..n {
        let mut span = DMatrix::zeros(n, n);
        for (j, st) in states.iter().enumerate() {
            if r.abs_diff(j) > delta {
                span += st * st.transpose();
            }
        }
        let eig = span.symmetric_eigen();
        let cols: Vec<DVector<f64>> =
            (0..n).filter(|&k| eig.eigenvalues[k] < 1e-9).map(|k| eig.eigenvectors.column(k).into_owned()).collect();
        if !cols.is_empty() {
            bases.push((r, DMatrix::from_columns(&cols)));
        }
    }

    // block 0 is E_0 (inconclusive), then one reduced block per answer
    let mut block_sizes = vec![n];
    let mut cost = vec![DMatrix::zeros(n, n)];
    for (r, q) in &bases {
        let v = q.transpose() * &states[*r];
        block_sizes.push(q.ncols());
        cost.push(&v * v.transpose() * (-1.0 / n as f64));
    }
    let mut constraints = Vec::new();
    let mut rhs = Vec::new();
    for p in 0..n {
        for t in p..n {
            let mut unit = DMatrix::zeros(n, n);
            unit[(p, t)] = if p == t { 1.0 } else { 0.5 };
            unit[(t, p)] = unit[(p, t)];
            let mut row = vec![unit.clone()];
            row.extend(bases.iter().map(|(_, q)| q.transpose() * &unit * q));
            constraints.push(row);
            rhs.push(if p == t { 1.0 } else { 0.0 });
        }
    }
    let sdp = DenseSdp { block_sizes, cost, constraints, rhs };
    let mut sol = sdp.solve(1e-10, 150);
    sol.primal = -sol.primal;
    sol.dual = -sol.dual;
    sol
}

/// Random Gram matrix of `n` unit vectors in `R^n` with smallest eigenvalue at least `min_eig`.
pub fn random_gram(rng: &mut ChaCha8Rng, n: usize, min_eig: f64) -> DMatrix<f64> {
    loop {
        let vs: Vec<DVector<f64>> = (0..n)
            .map(|_| {
                let v = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
                let norm = v.norm();
                v / norm
            })
            .collect();
        let g = DMatrix::from_fn(n, n, |i, j| vs[i].dot(&vs[j]));
        if g.clone().symmetric_eigenvalues().min() >= min_eig {
            return g;
        }
    }
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Golden-section maximization of a unimodal function on `[lo, hi]`.
pub fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> (f64, f64) {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - g * (hi - lo);
    let mut b = lo + g * (hi - lo);
    let (mut fa, mut fb) = (f(a), f(b));
    for _ in 0..200 {
        if fa < fb {
            lo = a;
            a = b;
            fa = fb;
            b = lo + g * (hi - lo);
            fb = f(b);
        } else {
            hi = b;
            b = a;
            fb = fa;
            a = hi - g * (hi - lo);
            fa = f(a);
        }
    }
    let x = 0.5 * (lo + hi);
    (x, f(x))
}

/// Two states with overlap `c`, no errors allowed: maximize `(z1 + z2)/2`
/// subject to `diag(z1, z2) ⪯ G`, i.e. `(1-z1)(1-z2) ≥ c²`. The second
/// coordinate is saturated, leaving a one-parameter problem.
pub fn two_state_unambiguous(c: f64) -> f64 {
    let upper = 1.0 - c * c;
    golden_max(|z1| 0.5 * (z1 + 1.0 - c * c / (1.0 - z1)), 0.0, upper).1
}

/// Two states with overlap `c`, any answer allowed: best orthonormal
/// measurement basis in the plane of the states.
pub fn two_state_minimum_error(c: f64) -> f64 {
    let theta = c.acos();
    let success = |phi: f64| 0.5 * (phi.cos().powi(2) + (theta - phi).sin().powi(2));
    // coarse scan, then refine around the best grid point
    let grid = 2000;
    let best = (0..=grid)
        .map(|i| -std::f64::consts::FRAC_PI_2 + std::f64::consts::PI * i as f64 / grid as f64)
        .max_by(|a, b| success(*a).total_cmp(&success(*b)))
        .unwrap();
    let step = std::f64::consts::PI / grid as f64;
    golden_max(success, best - step, best + step).1
}
