//! DIMACS I/O, the built-in DPLL and CDCL solvers and external solver
//! invocation.

use std::fmt;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::cnf::CnfFormula;
use crate::error::{Error, Result};

pub mod cdcl;
pub mod dimacs;
pub mod dpll;
pub mod external;

pub use cdcl::solve_cdcl;
pub use dimacs::{parse_dimacs, to_dimacs_string, write_dimacs};
pub use dpll::solve_internal;
pub use external::{run_external, SOLVER_ENV};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Sat,
    Unsat,
    Unknown,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Sat => "sat",
            Status::Unsat => "unsat",
            Status::Unknown => "unknown",
        })
    }
}

/// Outcome of one solver run. `model` is present exactly when the status
/// is [`Status::Sat`] and is indexed by variable id (index 0 unused).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolveResult {
    pub status: Status,
    pub model: Option<Vec<bool>>,
    pub elapsed: Duration,
    pub solver_id: String,
}

/// Which solver answers a formula.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Backend {
    /// The DPLL solver.
    Internal,
    /// The clause-learning solver.
    Cdcl,
    /// Shell command template; `{cnf}` is replaced by the CNF path and an
    /// optional `{model}` by a path the solver writes its model to.
    External(String),
}

impl Backend {
    /// The external command named by `MINWISE_SOLVER`, else the internal solver.
    pub fn from_env() -> Backend {
        match std::env::var(SOLVER_ENV) {
            Ok(cmd) if !cmd.trim().is_empty() => Backend::External(cmd),
            _ => Backend::Internal,
        }
    }

    /// Name recorded in reports: the solver id, or the command template.
    pub fn id(&self) -> String {
        match self {
            Backend::Internal => dpll::SOLVER_ID.to_string(),
            Backend::Cdcl => cdcl::SOLVER_ID.to_string(),
            Backend::External(cmd) => cmd.clone(),
        }
    }
}

/// Solves `f` with `backend`. A model returned by an external solver is
/// checked against `f`; one that violates a clause is an error.
pub fn solve(f: &CnfFormula, backend: &Backend, time_limit: Option<Duration>) -> Result<SolveResult> {
    match backend {
        Backend::Internal => Ok(solve_internal(f, time_limit)),
        Backend::Cdcl => Ok(solve_cdcl(f, time_limit)),
        Backend::External(template) => {
            let mut file = tempfile::Builder::new().suffix(".cnf").tempfile()?;
            write_dimacs(f, file.as_file_mut())?;
            let mut result = run_external(file.path(), template, time_limit)?;
            if let Some(model) = &mut result.model {
                model.resize(f.var_count() as usize + 1, false);
                if !f.is_satisfied_by(model) {
                    return Err(Error::Solver(format!(
                        "{} returned a model that violates the formula",
                        result.solver_id
                    )));
                }
            }
            Ok(result)
        }
    }
}
