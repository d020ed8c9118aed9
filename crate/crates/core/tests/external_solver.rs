use std::fs;
use std::os::unix::fs::PermissionsExt;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use minwise_core::cnf::CnfFormula;
use minwise_core::solver::{run_external, solve, solve_cdcl, solve_internal, Backend, Status};
use minwise_core::Error;
use rand::prelude::*;

fn script(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, format!("#!/bin/sh\n{body}\n")).unwrap();
    fs::set_permissions(&path, fs::Permissions::from_mode(0o755)).unwrap();
    path
}

fn cnf_file(dir: &Path) -> PathBuf {
    let path = dir.join("in.cnf");
    fs::write(&path, "p cnf 2 1\n1 2 0\n").unwrap();
    path
}

/// Small recursive DPLL in Python: a solver that shares no code with the crate.
const PY_DPLL: &str = r#"import sys
sys.setrecursionlimit(10000)
clauses = []
for line in open(sys.argv[1]):
    t = line.split()
    if not t or t[0] in ("c", "p"):
        continue
    clauses.append([int(x) for x in t if x != "0"])
def dpll(cls, asg):
    while True:
        if any(len(c) == 0 for c in cls):
            return None
        unit = next((c[0] for c in cls if len(c) == 1), None)
        if unit is None:
            break
        asg = asg + [unit]
        cls = [[l for l in c if l != -unit] for c in cls if unit not in c]
    if not cls:
        return asg
    v = abs(cls[0][0])
    for lit in (v, -v):
        r = dpll([[l for l in c if l != -lit] for c in cls if lit not in c], asg + [lit])
        if r is not None:
            return r
    return None
m = dpll(clauses, [])
if m is None:
    print("s UNSATISFIABLE")
    sys.exit(20)
print("s SATISFIABLE")
print("v " + " ".join(map(str, m)) + " 0")
sys.exit(10)
"#;

#[test]
fn stub_sat_and_unsat() {
    let dir = tempfile::tempdir().unwrap();
    let cnf = cnf_file(dir.path());
    let sat = script(dir.path(), "sat.sh", "echo 'c stub'; echo 's SATISFIABLE'; echo 'v -1 2 0'; exit 10");
    let r = run_external(&cnf, &format!("{} {{cnf}}", sat.display()), None).unwrap();
    assert_eq!(r.status, Status::Sat);
    assert_eq!(r.model.unwrap(), vec![false, false, true]);

    let unsat = script(dir.path(), "unsat.sh", "exit 20");
    let r = run_external(&cnf, &format!("{} {{cnf}}", unsat.display()), None).unwrap();
    assert_eq!((r.status, r.model), (Status::Unsat, None));
}

#[test]
fn stub_writes_model_file() {
    let dir = tempfile::tempdir().unwrap();
    let cnf = cnf_file(dir.path());
    let s = script(dir.path(), "m.sh", "printf 'SAT\\n1 -2 0\\n' > \"$2\"");
    let r = run_external(&cnf, &format!("{} {{cnf}} {{model}}", s.display()), None).unwrap();
    assert_eq!(r.status, Status::Sat);
    assert_eq!(r.model.unwrap(), vec![false, true, false]);
}

#[test]
fn stub_killed_at_time_limit() {
    let dir = tempfile::tempdir().unwrap();
    let cnf = cnf_file(dir.path());
    let slow = script(dir.path(), "slow.sh", "exec sleep 30");
    let t = Instant::now();
    let r = run_external(&cnf, &format!("{} {{cnf}}", slow.display()), Some(Duration::from_millis(300))).unwrap();
    assert_eq!(r.status, Status::Unknown);
    assert!(r.model.is_none());
    assert!(r.elapsed >= Duration::from_millis(300));
    assert!(t.elapsed() < Duration::from_secs(10));
}

#[test]
fn malformed_and_missing_solvers_are_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cnf = cnf_file(dir.path());
    let bad = script(dir.path(), "bad.sh", "echo 'hello there'");
    let err = run_external(&cnf, &format!("{} {{cnf}}", bad.display()), None).unwrap_err();
    assert!(matches!(err, Error::Solver(_)), "{err}");
    let err = run_external(&cnf, "/nonexistent/solver-binary {cnf}", None).unwrap_err();
    assert!(matches!(err, Error::Solver(_)), "{err}");
}

#[test]
fn model_violating_the_formula_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let liar = script(dir.path(), "liar.sh", "echo 's SATISFIABLE'; echo 'v -1 -2 0'");
    let f = CnfFormula::from_clauses(2, vec![vec![1, 2]]);
    let err = solve(&f, &Backend::External(format!("{} {{cnf}}", liar.display())), None).unwrap_err();
    assert!(matches!(err, Error::Solver(_)), "{err}");
}

#[test]
fn external_agrees_with_internal_on_random_3cnf() {
    let dir = tempfile::tempdir().unwrap();
    let py = dir.path().join("dpll.py");
    fs::write(&py, PY_DPLL).unwrap();
    let backend = Backend::External(format!("python3 {} {{cnf}}", py.display()));
    let mut rng = StdRng::seed_from_u64(7);
    let mut seen = [0usize; 2];
    for _ in 0..50 {
        let clauses: Vec<Vec<i32>> = (0..88)
            .map(|_| {
                let vars = rand::seq::index::sample(&mut rng, 20, 3);
                vars.iter()
                    .map(|v| if rng.gen() { v as i32 + 1 } else { -(v as i32 + 1) })
                    .collect()
            })
            .collect();
        let f = CnfFormula::from_clauses(20, clauses);
        let ext = solve(&f, &backend, Some(Duration::from_secs(60))).unwrap();
        let int = solve_internal(&f, None);
        assert_eq!(ext.status, int.status);
        assert_eq!(solve_cdcl(&f, None).status, int.status);
        seen[usize::from(int.status == Status::Sat)] += 1;
    }
    // Near the threshold, both answers occur.
    assert!(seen[0] > 0 && seen[1] > 0, "{seen:?}");
}
