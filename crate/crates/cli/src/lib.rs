//! Command-line front end for the discrimination toolkit.
//!
//! Exit codes: 0 success, 1 a diagnostic check failed (`fourier-check`
//! found violations), 2 usage or input error, 3 numerical failure or a
//! solve that did not reach `optimal`, 4 I/O failure.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::Parser;
use rayon::prelude::*;
use thiserror::Error;

use cad_core::bounds::{general_lower_bound, qcp_bound, qsad_bound};
use cad_core::fourier::decay_check;
use cad_core::solver::CertificateReport;
use cad_core::srm::{outcome_profile, srm, SrmData};
use cad_core::{
    probabilities, reconstruct_povm, simulate_outcomes, solve_cad_with, verify_certificate, CadError, CadProblem,
    ProblemKind, SdpSolution, SolveStatus,
};

pub mod args;
pub mod input;
pub mod report;

use args::{BoundArgs, Cli, Command, DeltaRange, Format, FourierArgs, OutputArgs, ProfileArgs, SolveArgs, SweepArgs};
use input::build_problem;
use report::{
    sig12, write_json, write_series, write_sweep, BoundRow, FourierRow, ProblemInfo, ProfileRow, Simulation,
    SolveReport, SweepRow,
};

/// Environment variable capping the sweep worker threads.
pub const THREADS_ENV: &str = "CAD_THREADS";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Numerical(String),
    #[error("{0}")]
    CheckFailed(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("write failed: {0}")]
    Write(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::CheckFailed(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io { .. } | CliError::Write(_) => 4,
        }
    }
}

impl From<CadError> for CliError {
    fn from(e: CadError) -> Self {
        match e {
            CadError::NumericalFailure(_) | CadError::BadPovm(_) => CliError::Numerical(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

/// Parses `argv` (including the program name), runs the command against the
/// process standard streams and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = io::stdout();
    let stderr = io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

/// As [`run`], writing results to `out` (unless `--output` is given) and
/// diagnostics to `err`.
pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(cli.command, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::Solve(a) => solve(a, out),
        Command::Sweep(a) => sweep(a, out),
        Command::Bound(a) => bound(a, out),
        Command::Profile(a) => profile(a, out),
        Command::FourierCheck(a) => fourier_check(a, out),
    }
}

/// Runs `body` against the `--output` file if given, else against `out`.
fn with_output(
    args: &OutputArgs,
    out: &mut dyn Write,
    body: impl FnOnce(&mut dyn Write) -> Result<(), CliError>,
) -> Result<(), CliError> {
    match &args.output {
        Some(path) => {
            let file = File::create(path).map_err(|source| CliError::Io { path: path.clone(), source })?;
            let mut w = BufWriter::new(file);
            body(&mut w)?;
            w.flush().map_err(|source| CliError::Io { path: path.clone(), source })
        }
        None => body(out),
    }
}

fn info(problem: &CadProblem) -> ProblemInfo {
    ProblemInfo { kind: problem.kind, n: problem.n(), c: problem.c }
}

fn check_range(range: DeltaRange, n: usize) -> Result<DeltaRange, CliError> {
    if range.hi >= n {
        return Err(CliError::Usage(format!("Δ range {}..{} exceeds n - 1 = {}", range.lo, range.hi, n - 1)));
    }
    Ok(range)
}

fn row_from(problem: &CadProblem, data: &SrmData, sol: &SdpSolution) -> Result<SweepRow, CliError> {
    let p = probabilities(sol, &sol.structure);
    Ok(SweepRow {
        delta: problem.delta,
        ps: sig12(p.ps),
        pe: sig12(p.pe),
        pi: sig12(p.pi),
        bound: sig12(general_lower_bound(data, problem.delta)?.value),
        ps_me: sig12(data.ps_me),
        primal_value: sig12(sol.primal_value),
        dual_value: sig12(sol.dual_value),
        gap: sig12(sol.gap),
        iterations: sol.iterations,
        status: sol.status,
    })
}

fn require_optimal(rows: &[SweepRow]) -> Result<(), CliError> {
    match rows.iter().find(|r| r.status != SolveStatus::Optimal) {
        Some(r) => Err(CliError::Numerical(format!("solve at Δ = {} ended with status {}", r.delta, r.status))),
        None => Ok(()),
    }
}

fn rounded_certificate(c: CertificateReport) -> CertificateReport {
    CertificateReport {
        primal_slack_min_eig: sig12(c.primal_slack_min_eig),
        primal_blocks_min_eig: sig12(c.primal_blocks_min_eig),
        dual_min_eig: sig12(c.dual_min_eig),
        dual_blocks_min_eig: sig12(c.dual_blocks_min_eig),
        relative_gap: sig12(c.relative_gap),
    }
}

fn solve(a: SolveArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let problem = build_problem(&a.problem, a.delta)?;
    let data = srm(problem.gram())?;
    let opts = a.solver.options();
    let sol = solve_cad_with(&problem, &opts)?;
    let row = row_from(&problem, &data, &sol)?;

    let simulation = match (a.trials, a.k0) {
        (Some(trials), Some(k0)) => {
            if k0 == 0 || k0 > problem.n() {
                return Err(CliError::Usage(format!("--k0 must lie in 1..={}", problem.n())));
            }
            let povm = reconstruct_povm(&sol, &problem)?;
            let counts = simulate_outcomes(&povm, k0 - 1, trials, a.seed)?;
            let expected = povm.outcome_probabilities(k0 - 1).into_iter().map(sig12).collect();
            Some(Simulation { k0, trials, seed: a.seed, counts, expected })
        }
        _ => None,
    };

    let report = SolveReport {
        problem: info(&problem),
        relative_gap: sig12(sol.relative_gap()),
        primal_residual: sig12(sol.primal_residual),
        certificate: rounded_certificate(verify_certificate(&problem, &sol)?),
        simulation,
        row,
    };
    with_output(&a.output, out, |w| match a.output.format.unwrap_or(Format::Json) {
        Format::Json => write_json(w, &report),
        Format::Csv => write_sweep(w, Format::Csv, &report.problem, std::slice::from_ref(&report.row)),
    })?;
    require_optimal(std::slice::from_ref(&report.row))
}

fn thread_pool() -> Result<rayon::ThreadPool, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        match v.trim().parse::<usize>() {
            Ok(k) if k > 0 => builder = builder.num_threads(k),
            _ => return Err(CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got `{v}`"))),
        }
    }
    builder.build().map_err(|e| CliError::Numerical(format!("cannot start worker threads: {e}")))
}

fn sweep(a: SweepArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let base = build_problem(&a.problem, 0)?;
    let n = base.n();
    let range = check_range(a.delta.unwrap_or(DeltaRange::full(n)), n)?;
    let data = srm(base.gram())?;
    let opts = a.solver.options();

    // collect() on an indexed parallel iterator keeps Δ order
    let rows: Vec<SweepRow> = thread_pool()?.install(|| {
        range
            .values()
            .collect::<Vec<_>>()
            .into_par_iter()
            .map(|delta| {
                let problem = base.with_delta(delta)?;
                row_from(&problem, &data, &solve_cad_with(&problem, &opts)?)
            })
            .collect::<Result<_, CliError>>()
    })?;

    let problem = info(&base);
    with_output(&a.output, out, |w| write_sweep(w, a.output.format.unwrap_or(Format::Csv), &problem, &rows))?;
    require_optimal(&rows)
}

fn bound(a: BoundArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let base = build_problem(&a.problem, 0)?;
    let n = base.n();
    let range = check_range(a.delta.unwrap_or(DeltaRange::full(n)), n)?;
    let data = srm(base.gram())?;
    let rows = range
        .values()
        .map(|delta| {
            let closed_form = match (base.kind, base.c) {
                (ProblemKind::Qcp, Some(c)) => Some(qcp_bound(c, delta, data.ps_me)),
                (ProblemKind::Qsad, Some(c)) => Some(qsad_bound(n, c, delta)?),
                _ => None,
            };
            Ok(BoundRow {
                delta,
                bound: sig12(general_lower_bound(&data, delta)?.value),
                closed_form: closed_form.map(sig12),
                ps_me: sig12(data.ps_me),
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let problem = info(&base);
    with_output(&a.output, out, |w| write_series(w, a.output.format.unwrap_or(Format::Csv), Some(&problem), &rows))
}

fn profile(a: ProfileArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let base = build_problem(&a.problem, 0)?;
    if a.k0 == 0 || a.k0 > base.n() {
        return Err(CliError::Usage(format!("--k0 must lie in 1..={}", base.n())));
    }
    let prof = outcome_profile(&srm(base.gram())?, a.k0 - 1)?;
    let rows: Vec<ProfileRow> = prof
        .delta_axis
        .iter()
        .zip(&prof.probs)
        .map(|(&delta_offset, &p)| ProfileRow { delta_offset, probability: sig12(p) })
        .collect();
    let problem = info(&base);
    with_output(&a.output, out, |w| write_series(w, a.output.format.unwrap_or(Format::Csv), Some(&problem), &rows))
}

fn fourier_check(a: FourierArgs, out: &mut dyn Write) -> Result<(), CliError> {
    if !(a.c > 0.0 && a.c < 1.0) {
        return Err(CliError::Usage(format!("--c must lie in (0, 1), got {}", a.c)));
    }
    let chk = decay_check(a.c, a.kmax)?;
    let rows: Vec<FourierRow> = chk
        .coefficients
        .iter()
        .enumerate()
        .map(|(k, &m)| FourierRow { k, mu_hat: sig12(m), bound: sig12(chk.bound(k)) })
        .collect();
    with_output(&a.output, out, |w| write_series(w, a.output.format.unwrap_or(Format::Csv), None, &rows))?;
    if chk.violations.is_empty() {
        Ok(())
    } else {
        Err(CliError::CheckFailed(format!("decay bound violated at k = {:?}", chk.violations)))
    }
}
