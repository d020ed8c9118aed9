//! CNF assembly: variable pool, clause store with constant folding,
//! conjunction definitions, at-most-k cardinality, and lexicographic `⪯`.

use std::collections::HashMap;
use std::ops::Not;

use crate::error::{Error, Result};

/// A literal over a pool variable, or a constant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Lit {
    Const(bool),
    Var { id: u32, negated: bool },
}

impl Lit {
    pub const TRUE: Lit = Lit::Const(true);
    pub const FALSE: Lit = Lit::Const(false);

    pub fn pos(id: u32) -> Lit {
        Lit::Var { id, negated: false }
    }

    /// Signed DIMACS integer, `None` for constants.
    pub fn dimacs(self) -> Option<i32> {
        match self {
            Lit::Const(_) => None,
            Lit::Var { id, negated } => Some(if negated { -(id as i32) } else { id as i32 }),
        }
    }

    pub fn var(self) -> Option<u32> {
        match self {
            Lit::Const(_) => None,
            Lit::Var { id, .. } => Some(id),
        }
    }

    /// Truth value under `model` (indexed by variable id).
    pub fn eval(self, model: &[bool]) -> bool {
        match self {
            Lit::Const(b) => b,
            Lit::Var { id, negated } => model[id as usize] != negated,
        }
    }

    /// Truth value with variable values supplied by `value`.
    pub fn eval_with(self, value: impl Fn(u32) -> bool) -> bool {
        match self {
            Lit::Const(b) => b,
            Lit::Var { id, negated } => value(id) != negated,
        }
    }
}

impl Not for Lit {
    type Output = Lit;

    fn not(self) -> Lit {
        match self {
            Lit::Const(b) => Lit::Const(!b),
            Lit::Var { id, negated } => Lit::Var {
                id,
                negated: !negated,
            },
        }
    }
}

impl From<bool> for Lit {
    fn from(b: bool) -> Lit {
        Lit::Const(b)
    }
}

/// Clauses over a variable pool. Clauses are stored as signed DIMACS
/// integers after constant folding.
#[derive(Clone, Debug, Default)]
pub struct CnfFormula {
    var_count: u32,
    clauses: Vec<Vec<i32>>,
    annotations: Vec<(String, u32)>,
    conjunctions: HashMap<Vec<i32>, Lit>,
    trivially_false: bool,
}

impl CnfFormula {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn var_count(&self) -> u32 {
        self.var_count
    }

    pub fn clauses(&self) -> &[Vec<i32>] {
        &self.clauses
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    /// Set once a clause folded to the empty clause.
    pub fn is_trivially_false(&self) -> bool {
        self.trivially_false
    }

    pub fn annotations(&self) -> &[(String, u32)] {
        &self.annotations
    }

    pub fn new_var(&mut self) -> Lit {
        self.var_count += 1;
        Lit::pos(self.var_count)
    }

    pub fn new_named_var(&mut self, name: impl Into<String>) -> Lit {
        let lit = self.new_var();
        self.annotations.push((name.into(), self.var_count));
        lit
    }

    /// Adds a clause. True constants or complementary literals drop it;
    /// false constants and repeated literals are removed. A clause that
    /// folds to nothing is kept as the empty clause and marks the formula
    /// trivially false.
    pub fn add_clause(&mut self, lits: &[Lit]) {
        let mut out: Vec<i32> = Vec::with_capacity(lits.len());
        for &l in lits {
            match l {
                Lit::Const(true) => return,
                Lit::Const(false) => {}
                Lit::Var { .. } => {
                    let v = l.dimacs().expect("variable literal");
                    if out.contains(&-v) {
                        return;
                    }
                    if !out.contains(&v) {
                        out.push(v);
                    }
                }
            }
        }
        if out.is_empty() {
            self.trivially_false = true;
        }
        self.clauses.push(out);
    }

    /// Pushes already-folded DIMACS clauses, e.g. from a parsed file.
    pub fn from_clauses(var_count: u32, clauses: Vec<Vec<i32>>) -> Self {
        let trivially_false = clauses.iter().any(Vec::is_empty);
        CnfFormula {
            var_count,
            clauses,
            trivially_false,
            ..Self::default()
        }
    }

    /// Returns a literal `a` with `(l_1 ∧ … ∧ l_m) → a`.
    ///
    /// Only that direction is emitted: the result is meant to be counted
    /// under an upper bound, where a spurious `a = 1` can only hurt. A
    /// single remaining literal is returned as-is and repeated requests for
    /// the same literal set share one variable.
    pub fn define_conjunction(&mut self, lits: &[Lit]) -> Result<Lit> {
        if lits.is_empty() {
            return Err(Error::InvalidConfig("conjunction of no literals".into()));
        }
        let mut key: Vec<i32> = Vec::with_capacity(lits.len());
        for &l in lits {
            match l {
                Lit::Const(false) => return Ok(Lit::FALSE),
                Lit::Const(true) => {}
                Lit::Var { .. } => key.push(l.dimacs().expect("variable literal")),
            }
        }
        key.sort_unstable();
        key.dedup();
        if key.iter().any(|v| key.contains(&-v)) {
            return Ok(Lit::FALSE);
        }
        match key.len() {
            0 => return Ok(Lit::TRUE),
            1 => return Ok(dimacs_lit(key[0])),
            _ => {}
        }
        if let Some(&a) = self.conjunctions.get(&key) {
            return Ok(a);
        }
        let a = self.new_var();
        let mut clause: Vec<Lit> = key.iter().map(|&v| !dimacs_lit(v)).collect();
        clause.push(a);
        self.add_clause(&clause);
        self.conjunctions.insert(key, a);
        Ok(a)
    }

    /// At most `bound` of `lits` are true, using the sequential counter.
    pub fn at_most(&mut self, lits: &[Lit], bound: usize) {
        SequentialCounter.encode_at_most(self, lits, bound);
    }

    /// Lexicographic `a ⪯ b` over equal-length tuples (1 > 0).
    ///
    /// Uses fresh prefix-equality variables `x_1..x_{r−1}` (`x_i` ↔ the
    /// first `i` positions agree) and the AND/common-subexpression clause
    /// schema, preceded by `¬a_1 ∨ b_1` for the leading position.
    pub fn lex_leq(&mut self, a: &[Lit], b: &[Lit]) -> Result<()> {
        if a.len() != b.len() {
            return Err(Error::InvalidConfig(format!(
                "lex comparison of lengths {} and {}",
                a.len(),
                b.len()
            )));
        }
        let r = a.len();
        if r == 0 {
            return Ok(());
        }
        self.add_clause(&[!a[0], b[0]]);
        if r == 1 {
            return Ok(());
        }
        let x: Vec<Lit> = (0..r - 1).map(|_| self.new_var()).collect();
        // 0-based: x[i] covers positions 0..=i; a[i + 1] is the schema's a_{i+2}.
        self.add_clause(&[!x[0], b[0], !a[0]]);
        self.add_clause(&[!x[0], a[0], !b[0]]);
        self.add_clause(&[x[0], !a[0], !b[0]]);
        self.add_clause(&[x[0], a[0], b[0]]);
        for i in 0..r - 2 {
            self.add_clause(&[x[i], !x[i + 1]]);
        }
        for i in 0..r - 2 {
            self.add_clause(&[!x[i + 1], b[i + 1], !a[i + 1]]);
        }
        for i in 0..r - 2 {
            self.add_clause(&[!x[i + 1], a[i + 1], !b[i + 1]]);
        }
        for i in 0..r - 2 {
            self.add_clause(&[x[i + 1], !b[i + 1], !a[i + 1], !x[i]]);
        }
        for i in 0..r - 2 {
            self.add_clause(&[x[i + 1], b[i + 1], a[i + 1], !x[i]]);
        }
        for i in 0..r - 1 {
            self.add_clause(&[!x[i], b[i + 1], !a[i + 1]]);
        }
        Ok(())
    }

    /// Whether `model` (indexed by variable id) satisfies every clause.
    pub fn is_satisfied_by(&self, model: &[bool]) -> bool {
        self.clauses
            .iter()
            .all(|c| c.iter().any(|&v| dimacs_lit(v).eval(model)))
    }
}

pub(crate) fn dimacs_lit(v: i32) -> Lit {
    Lit::Var {
        id: v.unsigned_abs(),
        negated: v < 0,
    }
}

/// Strategy for at-most-k constraints.
pub trait CardinalityEncoding {
    fn encode_at_most(&self, f: &mut CnfFormula, lits: &[Lit], bound: usize);
}

/// Sinz's sequential counter: register `s_{i,j}` holds "at least `j` of the
/// first `i` inputs are true".
#[derive(Clone, Copy, Debug, Default)]
pub struct SequentialCounter;

impl CardinalityEncoding for SequentialCounter {
    fn encode_at_most(&self, f: &mut CnfFormula, lits: &[Lit], bound: usize) {
        let forced = lits.iter().filter(|&&l| l == Lit::TRUE).count();
        let xs: Vec<Lit> = lits.iter().copied().filter(|l| l.var().is_some()).collect();
        if forced > bound {
            f.add_clause(&[]);
            return;
        }
        let k = bound - forced;
        let m = xs.len();
        if k >= m {
            return;
        }
        if k == 0 {
            for &x in &xs {
                f.add_clause(&[!x]);
            }
            return;
        }
        // s[i][j]: among xs[0..=i], at least j + 1 are true.
        let s: Vec<Vec<Lit>> = (0..m - 1)
            .map(|_| (0..k).map(|_| f.new_var()).collect())
            .collect();
        f.add_clause(&[!xs[0], s[0][0]]);
        for j in 1..k {
            f.add_clause(&[!s[0][j]]);
        }
        for i in 1..m - 1 {
            f.add_clause(&[!xs[i], s[i][0]]);
            f.add_clause(&[!s[i - 1][0], s[i][0]]);
            for j in 1..k {
                f.add_clause(&[!xs[i], !s[i - 1][j - 1], s[i][j]]);
                f.add_clause(&[!s[i - 1][j], s[i][j]]);
            }
            f.add_clause(&[!xs[i], !s[i - 1][k - 1]]);
        }
        f.add_clause(&[!xs[m - 1], !s[m - 2][k - 1]]);
    }
}
