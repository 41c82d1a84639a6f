//! Dense real symmetric matrices and the spectral routines built on them.
//!
//! Storage is a `nalgebra::DMatrix<f64>` that is symmetrized exactly on
//! construction, so `m[(i, j)] == m[(j, i)]` holds bit for bit. Every other
//! module in the crate goes through [`SymMatrix`] for Gram matrices, their
//! square roots and dual variables.

use std::ops::Index;

use nalgebra::{DMatrix, DVector};

use crate::error::{CadError, Result};

/// Eigenvalues below this (in absolute value) are clamped to zero by
/// [`sqrt_psd`].
pub const PSD_CLAMP_TOL: f64 = 1e-10;

const EIGEN_MAX_ITER: usize = 10_000;

/// Dense real symmetric `n x n` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    data: DMatrix<f64>,
}

impl SymMatrix {
    /// Builds a symmetric matrix from an arbitrary square matrix using `(M + Mᵀ)/2`.
    pub fn from_matrix(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(CadError::BadShape(format!("expected a square matrix, got {}x{}", m.nrows(), m.ncols())));
        }
        if m.nrows() == 0 {
            return Err(CadError::BadDimension("matrix dimension must be at least 1".into()));
        }
        if m.iter().any(|v| !v.is_finite()) {
            return Err(CadError::BadInput("matrix has non-finite entries".into()));
        }
        let n = m.nrows();
        let mut data = m;
        for i in 0..n {
            for j in (i + 1)..n {
                let avg = 0.5 * (data[(i, j)] + data[(j, i)]);
                data[(i, j)] = avg;
                data[(j, i)] = avg;
            }
        }
        Ok(Self { data })
    }

    /// Builds from `n*n` row-major entries.
    pub fn from_row_major(n: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != n * n {
            return Err(CadError::BadShape(format!("expected {} entries for n = {n}, got {}", n * n, entries.len())));
        }
        Self::from_matrix(DMatrix::from_row_slice(n, n, entries))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(CadError::BadShape(format!("row of length {} in a {n}-row matrix", bad.len())));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        Self::from_row_major(n, &flat)
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        Self::from_matrix(DMatrix::from_fn(n, n, f))
    }

    pub fn identity(n: usize) -> Self {
        assert!(n >= 1, "identity of dimension 0");
        Self { data: DMatrix::identity(n, n) }
    }

    pub fn zeros(n: usize) -> Self {
        assert!(n >= 1, "zero matrix of dimension 0");
        Self { data: DMatrix::zeros(n, n) }
    }

    pub fn diag(values: &[f64]) -> Result<Self> {
        Self::from_matrix(DMatrix::from_diagonal(&DVector::from_column_slice(values)))
    }

    pub fn n(&self) -> usize {
        self.data.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[(i, j)]
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.data
    }

    /// Row-major copy of the entries.
    pub fn to_row_major(&self) -> Vec<f64> {
        let n = self.n();
        (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| self.data[(i, j)]).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.n()).map(|i| self.data.row(i).iter().copied().collect()).collect()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.data.column(j).iter().copied().collect()
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.amax()
    }

    /// Frobenius inner product `tr(A B)`.
    pub fn dot(&self, other: &SymMatrix) -> f64 {
        self.data.dot(&other.data)
    }

    pub fn trace(&self) -> f64 {
        self.data.trace()
    }
}

impl Index<(usize, usize)> for SymMatrix {
    type Output = f64;

    fn index(&self, idx: (usize, usize)) -> &f64 {
        &self.data[idx]
    }
}

/// Eigenvalues in ascending order with matching orthonormal eigenvector columns.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

impl EigenDecomposition {
    /// `V · diag(f(λ)) · Vᵀ`.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for (k, &lam) in self.values.iter().enumerate() {
            let w = f(lam);
            for i in 0..n {
                scaled[(i, k)] *= w;
            }
        }
        scaled * self.vectors.transpose()
    }
}

pub fn sym_eigen(m: &SymMatrix) -> Result<EigenDecomposition> {
    let eig = m
        .data
        .clone()
        .try_symmetric_eigen(f64::EPSILON, EIGEN_MAX_ITER)
        .ok_or_else(|| CadError::NumericalFailure("symmetric eigensolver did not converge".into()))?;
    let n = m.n();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok(EigenDecomposition { values, vectors })
}

pub fn min_eigenvalue(m: &SymMatrix) -> Result<f64> {
    Ok(sym_eigen(m)?.values[0])
}

/// True iff the smallest eigenvalue is at least `-tol`.
pub fn is_psd(m: &SymMatrix, tol: f64) -> bool {
    match min_eigenvalue(m) {
        Ok(v) => v >= -tol,
        Err(_) => false,
    }
}

/// Principal square root of a positive semidefinite matrix.
///
/// Eigenvalues in `[-1e-10, 0)` are clamped to zero; anything more negative
/// is rejected with [`CadError::NotPsd`]. Eigenvalues at the round-off level
/// of the decomposition are also treated as zero, so that e.g. a projector is
/// its own square root to full precision.
pub fn sqrt_psd(m: &SymMatrix) -> Result<SymMatrix> {
    let eig = sym_eigen(m)?;
    if eig.values[0] < -PSD_CLAMP_TOL {
        return Err(CadError::NotPsd { min_eigenvalue: eig.values[0] });
    }
    let top = eig.values.last().copied().unwrap_or(0.0).max(0.0);
    let noise = 4.0 * m.n() as f64 * f64::EPSILON * top;
    SymMatrix::from_matrix(eig.map_spectrum(|v| if v <= noise { 0.0 } else { v.sqrt() }))
}

/// Inverse of a positive definite matrix, rejecting condition numbers above `max_condition`.
pub fn inverse_pd(m: &SymMatrix, max_condition: f64) -> Result<SymMatrix> {
    let eig = sym_eigen(m)?;
    let lo = eig.values[0];
    let hi = eig.values[eig.values.len() - 1];
    if lo <= 0.0 || hi / lo > max_condition {
        return Err(CadError::NumericalFailure(format!(
            "matrix is singular or ill-conditioned (eigenvalues in [{lo:e}, {hi:e}])"
        )));
    }
    SymMatrix::from_matrix(eig.map_spectrum(|v| 1.0 / v))
}
