//! Certified-answer discrimination of ordered families of linearly
//! independent pure states.
//!
//! Given the Gram matrix of `n` states and an error radius `delta`, the
//! optimal measurement whose conclusive answers never land farther than
//! `delta` from the true index is found by solving a block-diagonal
//! semidefinite program ([`solver`]). Around it sit the square-root
//! measurement baseline ([`srm`]), analytic lower bounds ([`bounds`]) and
//! Fourier-decay diagnostics for the change-point square root ([`fourier`]).

pub mod bounds;
pub mod error;
pub mod fourier;
pub mod matrix;
pub mod povm;
pub mod problem;
pub mod quadrature;
pub mod solver;
pub mod srm;
pub mod structure;

pub use error::{CadError, Result};
pub use matrix::{is_psd, min_eigenvalue, sqrt_psd, sym_eigen, EigenDecomposition, SymMatrix};
pub use povm::{probabilities, reconstruct_povm, simulate_outcomes, PovmRealization, ProbBreakdown};
pub use problem::{gram_from_states, gram_qcp, gram_qsad, qsad_params, CadProblem, ProblemKind, QsadParams};
pub use solver::{solve_cad, solve_cad_with, verify_certificate, SdpSolution, SolveStatus, SolverOptions};
pub use structure::{adjoint_map, forward_map, BlockStructure, BlockVariable};
