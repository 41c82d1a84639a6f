//! Builds a [`CadProblem`] from command-line flags or a custom JSON file.

use std::fs;
use std::path::Path;

use cad_core::{gram_from_states, CadProblem, ProblemKind, SymMatrix};
use serde::Deserialize;

use crate::args::ProblemArgs;
use crate::CliError;

/// `{"n": 3, "gram": [[...]]}` or `{"states": [[...], ...]}`.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CustomFile {
    n: Option<usize>,
    gram: Option<Vec<Vec<f64>>>,
    states: Option<Vec<Vec<f64>>>,
}

pub fn load_custom(path: &Path) -> Result<SymMatrix, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_owned(), source })?;
    let file: CustomFile = serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("{}: malformed problem file: {e}", path.display())))?;
    let gram = match (file.gram, file.states) {
        (Some(rows), None) => SymMatrix::from_rows(&rows)?,
        (None, Some(states)) => gram_from_states(&states)?,
        _ => {
            return Err(CliError::Usage(format!(
                "{}: exactly one of \"gram\" or \"states\" must be given",
                path.display()
            )))
        }
    };
    if let Some(n) = file.n {
        if n != gram.n() {
            return Err(CliError::Usage(format!(
                "{}: \"n\" is {n} but the data has {} states",
                path.display(),
                gram.n()
            )));
        }
    }
    Ok(gram)
}

/// The problem at `delta`; for the families this validates `n` and `c`.
pub fn build_problem(args: &ProblemArgs, delta: usize) -> Result<CadProblem, CliError> {
    let problem = match args.problem {
        ProblemKind::Custom => {
            if args.n.is_some() || args.c.is_some() {
                return Err(CliError::Usage("--n and --c do not apply to --problem custom".into()));
            }
            let path = args.input.as_deref().ok_or_else(|| CliError::Usage("--problem custom needs --input".into()))?;
            CadProblem::custom(load_custom(path)?, delta)?
        }
        kind => {
            if args.input.is_some() {
                return Err(CliError::Usage(format!("--input only applies to --problem custom, not {kind}")));
            }
            let n = args.n.ok_or_else(|| CliError::Usage(format!("--problem {kind} needs --n")))?;
            let c = args.c.ok_or_else(|| CliError::Usage(format!("--problem {kind} needs --c")))?;
            if !(0.0..1.0).contains(&c) {
                return Err(CliError::Usage(format!("--c must lie in [0, 1), got {c}")));
            }
            if kind == ProblemKind::Qcp {
                CadProblem::qcp(n, c, delta)?
            } else {
                CadProblem::qsad(n, c, delta)?
            }
        }
    };
    Ok(problem)
}
