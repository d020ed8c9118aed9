//! Runs a DIMACS solver through `sh -c` and parses competition-style output.

use std::fs;
use std::path::Path;
use std::process::{Command, Stdio};
use std::thread;
use std::time::{Duration, Instant};

use crate::error::{Error, Result};

use super::{SolveResult, Status};

/// Environment variable holding the default solver command template.
pub const SOLVER_ENV: &str = "MINWISE_SOLVER";

const POLL: Duration = Duration::from_millis(10);

fn shell_quote(path: &Path) -> String {
    format!("'{}'", path.display().to_string().replace('\'', r"'\''"))
}

/// Runs `template` on `cnf_path`. `{cnf}` must appear in the template;
/// `{model}`, if present, names a file the solver writes its answer to in
/// the same `s`/`v` format (bare `SAT`/`UNSAT` first lines are accepted
/// there too). Otherwise stdout is parsed. Exit codes 10 and 20 stand in
/// for a missing status line.
pub fn run_external(cnf_path: &Path, template: &str, time_limit: Option<Duration>) -> Result<SolveResult> {
    if !template.contains("{cnf}") {
        return Err(Error::InvalidConfig(format!(
            "solver command {template:?} lacks the {{cnf}} placeholder"
        )));
    }
    let solver_id = template.split_whitespace().next().unwrap_or_default().to_string();
    let model_file = if template.contains("{model}") {
        Some(tempfile::NamedTempFile::new()?)
    } else {
        None
    };
    let mut command = template.replace("{cnf}", &shell_quote(cnf_path));
    if let Some(m) = &model_file {
        command = command.replace("{model}", &shell_quote(m.path()));
    }
    let stdout = tempfile::tempfile()?;
    let start = Instant::now();
    let mut child = Command::new("sh")
        .arg("-c")
        .arg(&command)
        .stdin(Stdio::null())
        .stdout(stdout.try_clone()?)
        .stderr(Stdio::null())
        .spawn()
        .map_err(|e| Error::Solver(format!("cannot start {solver_id:?}: {e}")))?;
    let exit = loop {
        if let Some(status) = child.try_wait()? {
            break status;
        }
        if time_limit.is_some_and(|t| start.elapsed() >= t) {
            let _ = child.kill();
            let _ = child.wait();
            return Ok(SolveResult {
                status: Status::Unknown,
                model: None,
                elapsed: start.elapsed(),
                solver_id,
            });
        }
        thread::sleep(POLL);
    };
    let elapsed = start.elapsed();
    let text = match &model_file {
        Some(m) => fs::read_to_string(m.path())?,
        None => {
            use std::io::{Read, Seek};
            let mut out = stdout;
            out.rewind()?;
            let mut s = String::new();
            out.read_to_string(&mut s)?;
            s
        }
    };
    let (status, model) = parse_output(&text, exit.code())
        .map_err(|msg| Error::Solver(format!("{solver_id}: {msg}")))?;
    Ok(SolveResult {
        status,
        model,
        elapsed,
        solver_id,
    })
}

/// Parses `s …` / `v …` output. Returns a model only for SAT.
pub fn parse_output(text: &str, exit_code: Option<i32>) -> std::result::Result<(Status, Option<Vec<bool>>), String> {
    let mut status = None;
    let mut values: Vec<i32> = Vec::new();
    let mut saw_values = false;
    for line in text.lines().map(str::trim) {
        let (tag, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        match tag {
            "s" => {
                status = Some(match rest.trim() {
                    "SATISFIABLE" => Status::Sat,
                    "UNSATISFIABLE" => Status::Unsat,
                    "UNKNOWN" | "INDETERMINATE" => Status::Unknown,
                    other => return Err(format!("unrecognised status {other:?}")),
                })
            }
            "SAT" if rest.is_empty() => status = Some(Status::Sat),
            "UNSAT" if rest.is_empty() => status = Some(Status::Unsat),
            "INDET" if rest.is_empty() => status = Some(Status::Unknown),
            "v" => {
                saw_values = true;
                values.extend(parse_values(rest)?);
            }
            _ if status == Some(Status::Sat) && !line.is_empty() && !line.starts_with('c') => {
                // Bare value lines after a `SAT` header (model-file style).
                saw_values = true;
                values.extend(parse_values(line)?);
            }
            _ => {}
        }
    }
    let status = match (status, exit_code) {
        (Some(s), _) => s,
        (None, Some(10)) => Status::Sat,
        (None, Some(20)) => Status::Unsat,
        (None, code) => return Err(format!("no status line (exit code {code:?})")),
    };
    if status != Status::Sat {
        return Ok((status, None));
    }
    if !saw_values {
        return Err("satisfiable without a model".into());
    }
    let max = values.iter().map(|v| v.unsigned_abs() as usize).max().unwrap_or(0);
    let mut model = vec![false; max + 1];
    let mut seen = vec![false; max + 1];
    for v in values {
        let i = v.unsigned_abs() as usize;
        if seen[i] && model[i] != (v > 0) {
            return Err(format!("variable {i} assigned both ways"));
        }
        seen[i] = true;
        model[i] = v > 0;
    }
    Ok((Status::Sat, Some(model)))
}

fn parse_values(s: &str) -> std::result::Result<Vec<i32>, String> {
    s.split_whitespace()
        .map(|t| t.parse::<i32>().map_err(|_| format!("bad value {t:?}")))
        .filter(|r| r != &Ok(0))
        .collect()
}
