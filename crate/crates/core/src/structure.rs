//! Block layout of the compact program.
//!
//! Block `r` holds the entries of `S E_r S` that can be nonzero once all
//! answers farther than `delta` from `r` are forbidden: the principal
//! submatrix on the window `[max(0, r-delta), min(n-1, r+delta)]`.
//! Indices are 0-based throughout.

use nalgebra::DMatrix;

use crate::error::{CadError, Result};
use crate::matrix::SymMatrix;

/// Inclusive index interval `lo..=hi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Window {
    pub lo: usize,
    pub hi: usize,
}

impl Window {
    pub fn len(&self) -> usize {
        self.hi - self.lo + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, i: usize) -> bool {
        self.lo <= i && i <= self.hi
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockStructure {
    pub n: usize,
    pub delta: usize,
    pub windows: Vec<Window>,
    /// Position of `r` inside its own window.
    pub centers: Vec<usize>,
}

impl BlockStructure {
    pub fn new(n: usize, delta: usize) -> Result<Self> {
        if n == 0 || delta >= n {
            return Err(CadError::BadDelta { n, delta });
        }
        let windows: Vec<Window> =
            (0..n).map(|r| Window { lo: r.saturating_sub(delta), hi: (r + delta).min(n - 1) }).collect();
        let centers = windows.iter().enumerate().map(|(r, w)| r - w.lo).collect();
        Ok(Self { n, delta, windows, centers })
    }

    /// Sum of block sizes, `n(2Δ+1) - Δ(Δ+1)`.
    pub fn total_dim(&self) -> usize {
        self.windows.iter().map(Window::len).sum()
    }

    pub fn block_sizes(&self) -> impl Iterator<Item = usize> + '_ {
        self.windows.iter().map(Window::len)
    }
}

/// The block-diagonal program variable, one PSD block per hypothesis.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockVariable {
    pub blocks: Vec<DMatrix<f64>>,
}

impl BlockVariable {
    pub fn zeros(s: &BlockStructure) -> Self {
        Self { blocks: s.block_sizes().map(|d| DMatrix::zeros(d, d)).collect() }
    }

    pub fn check_shape(&self, s: &BlockStructure) -> Result<()> {
        if self.blocks.len() != s.n {
            return Err(CadError::BadShape(format!("expected {} blocks, got {}", s.n, self.blocks.len())));
        }
        for (r, (b, w)) in self.blocks.iter().zip(&s.windows).enumerate() {
            if b.nrows() != w.len() || b.ncols() != w.len() {
                return Err(CadError::BadShape(format!(
                    "block {r} is {}x{}, window needs {}x{}",
                    b.nrows(),
                    b.ncols(),
                    w.len(),
                    w.len()
                )));
            }
        }
        Ok(())
    }

    /// `Σ_r ⟨C_r, Z_r⟩` with `C_r` selecting the center entry, before the `1/n` prior.
    pub fn center_sum(&self, s: &BlockStructure) -> f64 {
        self.blocks.iter().zip(&s.centers).map(|(b, &c)| b[(c, c)]).sum()
    }

    /// Frobenius inner product summed over blocks.
    pub fn dot(&self, other: &BlockVariable) -> f64 {
        self.blocks.iter().zip(&other.blocks).map(|(a, b)| a.dot(b)).sum()
    }
}

/// Places block `r` at rows/cols `window_r` of an `n x n` zero matrix.
pub fn embed_block(block: &DMatrix<f64>, w: Window, n: usize) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(n, n);
    out.view_mut((w.lo, w.lo), (w.len(), w.len())).copy_from(block);
    out
}

/// `Φ(Z) = Σ_r Embed_r(Z_r)`.
pub fn forward_map(z: &BlockVariable, s: &BlockStructure) -> Result<SymMatrix> {
    z.check_shape(s)?;
    SymMatrix::from_matrix(forward_raw(&z.blocks, s))
}

pub(crate) fn forward_raw(blocks: &[DMatrix<f64>], s: &BlockStructure) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(s.n, s.n);
    for (b, w) in blocks.iter().zip(&s.windows) {
        let mut view = out.view_mut((w.lo, w.lo), (w.len(), w.len()));
        view += b;
    }
    out
}

/// Adjoint of [`forward_map`]: block `r` is the principal submatrix of `y` on window `r`.
pub fn adjoint_map(y: &SymMatrix, s: &BlockStructure) -> Result<BlockVariable> {
    if y.n() != s.n {
        return Err(CadError::BadShape(format!("expected {}x{} matrix, got {}", s.n, s.n, y.n())));
    }
    Ok(BlockVariable { blocks: adjoint_raw(y.as_matrix(), s) })
}

pub(crate) fn adjoint_raw(y: &DMatrix<f64>, s: &BlockStructure) -> Vec<DMatrix<f64>> {
    s.windows.iter().map(|w| y.view((w.lo, w.lo), (w.len(), w.len())).into_owned()).collect()
}
