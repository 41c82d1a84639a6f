use std::path::PathBuf;
use std::str::FromStr;

use cad_core::{ProblemKind, SolverOptions};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "cad", version, about = "Certified-answer discrimination: solves, sweeps, bounds and profiles")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one instance and report probabilities and the duality certificate
    Solve(SolveArgs),
    /// Solve every Δ in a range; also reports the SRM bound and P^ME per row
    Sweep(SweepArgs),
    /// Evaluate the SRM-based lower bounds without running the solver
    Bound(BoundArgs),
    /// Outcome distribution of the square-root measurement for one true hypothesis
    Profile(ProfileArgs),
    /// Fourier coefficients of μ(θ, c) and their geometric decay check
    FourierCheck(FourierArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct ProblemArgs {
    #[arg(long, value_parser = ProblemKind::from_str)]
    pub problem: ProblemKind,
    /// Number of hypotheses (qcp, qsad)
    #[arg(long)]
    pub n: Option<usize>,
    /// Overlap between the reference and the anomalous state (qcp, qsad)
    #[arg(long)]
    pub c: Option<f64>,
    /// JSON file with {"gram": [[...]]} or {"states": [[...]]} (custom)
    #[arg(long)]
    pub input: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    #[arg(long, default_value_t = SolverOptions::default().gap_tol)]
    pub gap_tol: f64,
    #[arg(long, default_value_t = SolverOptions::default().feas_tol)]
    pub feas_tol: f64,
    #[arg(long, default_value_t = SolverOptions::default().max_iter)]
    pub max_iter: usize,
}

impl SolverArgs {
    pub fn options(&self) -> SolverOptions {
        SolverOptions { gap_tol: self.gap_tol, feas_tol: self.feas_tol, max_iter: self.max_iter }
    }
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Write here instead of standard output
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[arg(long)]
    pub delta: usize,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Sample this many measurement outcomes from the reconstructed POVM
    #[arg(long, requires = "k0")]
    pub trials: Option<u64>,
    /// True hypothesis for sampling, 1-based
    #[arg(long)]
    pub k0: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// `a..b` (inclusive) or a single value; defaults to 0..n-1
    #[arg(long)]
    pub delta: Option<DeltaRange>,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// `a..b` (inclusive) or a single value; defaults to 0..n-1
    #[arg(long)]
    pub delta: Option<DeltaRange>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ProfileArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// True hypothesis, 1-based
    #[arg(long)]
    pub k0: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct FourierArgs {
    #[arg(long)]
    pub c: f64,
    #[arg(long, default_value_t = cad_core::fourier::DEFAULT_K_MAX)]
    pub kmax: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Inclusive range of Δ values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DeltaRange {
    pub lo: usize,
    pub hi: usize,
}

impl DeltaRange {
    pub fn full(n: usize) -> Self {
        Self { lo: 0, hi: n - 1 }
    }

    pub fn values(self) -> std::ops::RangeInclusive<usize> {
        self.lo..=self.hi
    }
}

impl FromStr for DeltaRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parse = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("invalid Δ `{t}`: {e}"));
        let (lo, hi) = match s.split_once("..") {
            Some((a, b)) => (parse(a)?, parse(b.strip_prefix('=').unwrap_or(b))?),
            None => {
                let v = parse(s)?;
                (v, v)
            }
        };
        if lo > hi {
            return Err(format!("empty Δ range `{s}`"));
        }
        Ok(Self { lo, hi })
    }
}
