//! Problem instances: Gram matrices of the change-point and anomaly-detection
//! families, custom state families, and the anomaly-detection closed forms.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{CadError, Result};
use crate::matrix::{min_eigenvalue, SymMatrix};

/// Default threshold on the smallest Gram eigenvalue below which the states
/// are treated as linearly dependent.
pub const LIN_INDEP_TOL: f64 = 1e-9;

const UNIT_NORM_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemKind {
    /// Quantum change point: `G[i,j] = c^|i-j|`.
    Qcp,
    /// Quantum state anomaly detection: `G[i,j] = (1-c²)δ_ij + c²`.
    Qsad,
    Custom,
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProblemKind::Qcp => "qcp",
            ProblemKind::Qsad => "qsad",
            ProblemKind::Custom => "custom",
        })
    }
}

impl FromStr for ProblemKind {
    type Err = CadError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "qcp" => Ok(ProblemKind::Qcp),
            "qsad" => Ok(ProblemKind::Qsad),
            "custom" => Ok(ProblemKind::Custom),
            other => Err(CadError::BadInput(format!("unknown problem kind '{other}'"))),
        }
    }
}

/// A certified-answer discrimination instance with uniform priors.
#[derive(Debug, Clone)]
pub struct CadProblem {
    pub kind: ProblemKind,
    /// Overlap parameter; `None` for custom families.
    pub c: Option<f64>,
    pub delta: usize,
    gram: SymMatrix,
}

impl CadProblem {
    /// Validates unit diagonal and positive definiteness of `gram`.
    pub fn new(kind: ProblemKind, c: Option<f64>, delta: usize, gram: SymMatrix) -> Result<Self> {
        Self::with_tolerance(kind, c, delta, gram, LIN_INDEP_TOL)
    }

    pub fn with_tolerance(
        kind: ProblemKind,
        c: Option<f64>,
        delta: usize,
        gram: SymMatrix,
        lin_indep_tol: f64,
    ) -> Result<Self> {
        let n = gram.n();
        if delta >= n {
            return Err(CadError::BadDelta { n, delta });
        }
        for i in 0..n {
            if (gram[(i, i)] - 1.0).abs() > UNIT_NORM_TOL {
                return Err(CadError::BadState(format!(
                    "Gram diagonal entry {i} is {} (states must be unit norm)",
                    gram[(i, i)]
                )));
            }
        }
        check_independent(&gram, lin_indep_tol)?;
        Ok(Self { kind, c, delta, gram })
    }

    pub fn qcp(n: usize, c: f64, delta: usize) -> Result<Self> {
        Self::new(ProblemKind::Qcp, Some(c), delta, gram_qcp(n, c)?)
    }

    pub fn qsad(n: usize, c: f64, delta: usize) -> Result<Self> {
        Self::new(ProblemKind::Qsad, Some(c), delta, gram_qsad(n, c)?)
    }

    pub fn custom(gram: SymMatrix, delta: usize) -> Result<Self> {
        Self::new(ProblemKind::Custom, None, delta, gram)
    }

    /// Same states, different error radius.
    pub fn with_delta(&self, delta: usize) -> Result<Self> {
        if delta >= self.n() {
            return Err(CadError::BadDelta { n: self.n(), delta });
        }
        Ok(Self { delta, ..self.clone() })
    }

    pub fn n(&self) -> usize {
        self.gram.n()
    }

    pub fn gram(&self) -> &SymMatrix {
        &self.gram
    }
}

fn check_independent(gram: &SymMatrix, tol: f64) -> Result<()> {
    let lam = min_eigenvalue(gram)?;
    if lam <= tol {
        return Err(CadError::LinearDependence { min_eigenvalue: lam });
    }
    Ok(())
}

fn check_family_args(n: usize, c: f64) -> Result<()> {
    if n < 2 {
        return Err(CadError::BadDimension(format!("need at least 2 hypotheses, got {n}")));
    }
    if !(0.0..1.0).contains(&c) {
        if c >= 1.0 {
            return Err(CadError::LinearDependence { min_eigenvalue: 0.0 });
        }
        return Err(CadError::BadInput(format!("overlap c = {c} must lie in [0, 1)")));
    }
    Ok(())
}

/// Change-point Gram matrix `G[i,j] = c^|i-j|`.
pub fn gram_qcp(n: usize, c: f64) -> Result<SymMatrix> {
    check_family_args(n, c)?;
    SymMatrix::from_fn(n, |i, j| c.powi(i.abs_diff(j) as i32))
}

/// Anomaly-detection Gram matrix `G[i,j] = (1-c²)δ_ij + c²`.
pub fn gram_qsad(n: usize, c: f64) -> Result<SymMatrix> {
    check_family_args(n, c)?;
    let c2 = c * c;
    SymMatrix::from_fn(n, |i, j| if i == j { 1.0 } else { c2 })
}

/// Gram matrix of explicit real unit vectors.
pub fn gram_from_states(states: &[Vec<f64>]) -> Result<SymMatrix> {
    gram_from_states_with_tol(states, LIN_INDEP_TOL)
}

pub fn gram_from_states_with_tol(states: &[Vec<f64>], lin_indep_tol: f64) -> Result<SymMatrix> {
    let n = states.len();
    if n == 0 {
        return Err(CadError::BadDimension("no states given".into()));
    }
    let d = states[0].len();
    if states.iter().any(|s| s.len() != d) {
        return Err(CadError::BadState("states have different dimensions".into()));
    }
    if d < n {
        return Err(CadError::LinearDependence { min_eigenvalue: 0.0 });
    }
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    for (k, s) in states.iter().enumerate() {
        let norm = dot(s, s).sqrt();
        if (norm - 1.0).abs() > UNIT_NORM_TOL {
            return Err(CadError::BadState(format!("state {k} has norm {norm}")));
        }
    }
    let gram = SymMatrix::from_fn(n, |i, j| dot(&states[i], &states[j]))?;
    check_independent(&gram, lin_indep_tol)?;
    Ok(gram)
}

/// Entries of `√G` for the anomaly-detection family: `S = (a-b)I + b·11ᵀ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QsadParams {
    pub a: f64,
    pub b: f64,
}

impl QsadParams {
    /// Minimum-error success probability `a²`.
    pub fn ps_me(&self) -> f64 {
        self.a * self.a
    }

    /// Unambiguous success probability `(a-b)² = 1-c²`.
    pub fn ps_ua(&self) -> f64 {
        (self.a - self.b).powi(2)
    }
}

pub fn qsad_params(n: usize, c: f64) -> Result<QsadParams> {
    check_family_args(n, c)?;
    let nf = n as f64;
    let big = (1.0 + (nf - 1.0) * c * c).sqrt();
    let small = (1.0 - c * c).sqrt();
    Ok(QsadParams { a: (big + (nf - 1.0) * small) / nf, b: (big - small) / nf })
}
