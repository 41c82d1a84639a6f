//! Output rows and their CSV / JSON serialization.

use std::io::Write;

use cad_core::solver::CertificateReport;
use cad_core::{ProblemKind, SolveStatus};
use serde::Serialize;

use crate::args::Format;
use crate::CliError;

/// Rounds to 12 significant digits; the decimal text is locale independent.
pub fn sig12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

#[derive(Debug, Clone, Serialize)]
pub struct ProblemInfo {
    pub kind: ProblemKind,
    pub n: usize,
    pub c: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub delta: usize,
    pub ps: f64,
    pub pe: f64,
    pub pi: f64,
    pub bound: f64,
    pub ps_me: f64,
    pub primal_value: f64,
    pub dual_value: f64,
    pub gap: f64,
    pub iterations: usize,
    pub status: SolveStatus,
}

#[derive(Serialize)]
struct SweepCsvRow {
    delta: usize,
    ps: f64,
    pe: f64,
    pi: f64,
    bound: f64,
    ps_me: f64,
}

impl From<&SweepRow> for SweepCsvRow {
    fn from(r: &SweepRow) -> Self {
        Self { delta: r.delta, ps: r.ps, pe: r.pe, pi: r.pi, bound: r.bound, ps_me: r.ps_me }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Simulation {
    /// 1-based true hypothesis.
    pub k0: usize,
    pub trials: u64,
    pub seed: u64,
    /// Index 0 is the inconclusive outcome, index `r` answer `r` (1-based).
    pub counts: Vec<u64>,
    pub expected: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub problem: ProblemInfo,
    #[serde(flatten)]
    pub row: SweepRow,
    pub relative_gap: f64,
    pub primal_residual: f64,
    pub certificate: CertificateReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub simulation: Option<Simulation>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundRow {
    pub delta: usize,
    pub bound: f64,
    /// Family closed form (`qcp`, `qsad`); empty for custom problems.
    pub closed_form: Option<f64>,
    pub ps_me: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProfileRow {
    pub delta_offset: i64,
    pub probability: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FourierRow {
    pub k: usize,
    pub mu_hat: f64,
    pub bound: f64,
}

#[derive(Serialize)]
pub struct Series<'a, T> {
    pub problem: Option<&'a ProblemInfo>,
    pub rows: &'a [T],
}

pub fn write_json<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut *out, value).map_err(|e| CliError::Write(e.to_string()))?;
    writeln!(out).map_err(|e| CliError::Write(e.to_string()))
}

pub fn write_csv<T: Serialize>(out: &mut dyn Write, rows: &[T]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(|e| CliError::Write(e.to_string()))?;
    }
    w.flush().map_err(|e| CliError::Write(e.to_string()))
}

pub fn write_sweep(
    out: &mut dyn Write,
    format: Format,
    problem: &ProblemInfo,
    rows: &[SweepRow],
) -> Result<(), CliError> {
    match format {
        Format::Json => write_json(out, &Series { problem: Some(problem), rows }),
        Format::Csv => write_csv(out, &rows.iter().map(SweepCsvRow::from).collect::<Vec<_>>()),
    }
}

pub fn write_series<T: Serialize>(
    out: &mut dyn Write,
    format: Format,
    problem: Option<&ProblemInfo>,
    rows: &[T],
) -> Result<(), CliError> {
    match format {
        Format::Json => write_json(out, &Series { problem, rows }),
        Format::Csv => write_csv(out, rows),
    }
}
