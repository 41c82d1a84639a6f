use thiserror::Error;

/// Errors raised by the discrimination toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CadError {
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },
    #[error("states are linearly dependent (min Gram eigenvalue {min_eigenvalue:e})")]
    LinearDependence { min_eigenvalue: f64 },
    #[error("bad dimension: {0}")]
    BadDimension(String),
    #[error("bad state: {0}")]
    BadState(String),
    #[error("error radius {delta} out of range for n = {n}")]
    BadDelta { n: usize, delta: usize },
    #[error("shape mismatch: {0}")]
    BadShape(String),
    #[error("invalid POVM: {0}")]
    BadPovm(String),
    #[error("bad input: {0}")]
    BadInput(String),
}

pub type Result<T> = std::result::Result<T, CadError>;
