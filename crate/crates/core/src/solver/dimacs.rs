use std::io::{self, Write};

use crate::cnf::CnfFormula;
use crate::error::{Error, Result};

/// `p cnf <vars> <clauses>`, then one 0-terminated clause per line.
pub fn write_dimacs<W: Write>(f: &CnfFormula, sink: &mut W) -> io::Result<()> {
    let mut out = io::BufWriter::new(sink);
    writeln!(out, "p cnf {} {}", f.var_count(), f.num_clauses())?;
    for clause in f.clauses() {
        for lit in clause {
            write!(out, "{lit} ")?;
        }
        writeln!(out, "0")?;
    }
    out.flush()
}

pub fn to_dimacs_string(f: &CnfFormula) -> String {
    let mut buf = Vec::new();
    write_dimacs(f, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("DIMACS output is ASCII")
}

/// Parses DIMACS CNF. Comment lines (`c …`) are skipped; clauses may span
/// lines.
pub fn parse_dimacs(text: &str) -> Result<CnfFormula> {
    let mut header: Option<(u32, usize)> = None;
    let mut clauses = Vec::new();
    let mut current = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') || line.starts_with('%') {
            continue;
        }
        let err = |msg: String| Error::Parse { line: idx + 1, msg };
        if line.starts_with('p') {
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 4 || parts[1] != "cnf" {
                return Err(err(format!("bad problem line {line:?}")));
            }
            let vars = parts[2].parse().map_err(|_| err("bad variable count".into()))?;
            let count = parts[3].parse().map_err(|_| err("bad clause count".into()))?;
            header = Some((vars, count));
            continue;
        }
        let Some((vars, _)) = header else {
            return Err(err("clause before problem line".into()));
        };
        for tok in line.split_whitespace() {
            let v: i32 = tok.parse().map_err(|_| err(format!("bad literal {tok:?}")))?;
            if v == 0 {
                clauses.push(std::mem::take(&mut current));
            } else if v.unsigned_abs() > vars {
                return Err(err(format!("literal {v} exceeds declared {vars} variables")));
            } else {
                current.push(v);
            }
        }
    }
    let Some((vars, count)) = header else {
        return Err(Error::Parse {
            line: 0,
            msg: "missing problem line".into(),
        });
    };
    if !current.is_empty() {
        clauses.push(current);
    }
    if clauses.len() != count {
        return Err(Error::Parse {
            line: 0,
            msg: format!("header announces {count} clauses, found {}", clauses.len()),
        });
    }
    Ok(CnfFormula::from_clauses(vars, clauses))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnf::Lit;
    use proptest::prelude::*;

    #[test]
    fn empty_formula() {
        assert_eq!(to_dimacs_string(&CnfFormula::new()), "p cnf 0 0\n");
    }

    #[test]
    fn unit_clause() {
        let mut f = CnfFormula::new();
        let x = f.new_var();
        f.add_clause(&[x]);
        assert_eq!(to_dimacs_string(&f), "p cnf 1 1\n1 0\n");
        let mut g = CnfFormula::new();
        let y = g.new_var();
        g.add_clause(&[!y, Lit::FALSE]);
        assert_eq!(to_dimacs_string(&g), "p cnf 1 1\n-1 0\n");
    }

    #[test]
    fn parse_errors() {
        assert!(parse_dimacs("1 0\n").is_err());
        assert!(parse_dimacs("p cnf 1 1\n2 0\n").is_err());
        assert!(parse_dimacs("p cnf 1 2\n1 0\n").is_err());
        assert!(parse_dimacs("p dnf 1 1\n1 0\n").is_err());
        let f = parse_dimacs("c hi\np cnf 2 2\n1 -2\n 0 2 0\n").unwrap();
        assert_eq!(f.clauses(), &[vec![1, -2], vec![2]]);
    }

    proptest! {
        #[test]
        fn round_trip(clauses in prop::collection::vec(
            prop::collection::vec((1i32..=12, any::<bool>()), 0..6), 0..30)
        ) {
            let clauses: Vec<Vec<i32>> = clauses
                .into_iter()
                .map(|c| c.into_iter().map(|(v, neg)| if neg { -v } else { v }).collect())
                .collect();
            let f = CnfFormula::from_clauses(12, clauses.clone());
            let text = to_dimacs_string(&f);
            let g = parse_dimacs(&text).unwrap();
            prop_assert_eq!(g.var_count(), 12);
            prop_assert_eq!(g.clauses(), &clauses[..]);
            prop_assert_eq!(to_dimacs_string(&g), text);
        }
    }
}
