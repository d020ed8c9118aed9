//! Complete DPLL with unit propagation over two watched literals and
//! chronological backtracking. Branching is deterministic: the lowest
//! unassigned variable, tried true first.

use std::time::{Duration, Instant};

use crate::cnf::CnfFormula;

use super::{SolveResult, Status};

pub const SOLVER_ID: &str = "internal-dpll";

/// Formulas above this many clauses are refused as unknown.
pub const MAX_CLAUSES: usize = 2_000_000;

const UNASSIGNED: u8 = 2;

/// `2v` is the positive literal of variable `v`, `2v + 1` the negative one.
fn code(lit: i32) -> u32 {
    (lit.unsigned_abs() << 1) | u32::from(lit < 0)
}

struct Solver {
    /// Clause literals, flattened. The first two of each clause are watched.
    lits: Vec<u32>,
    starts: Vec<u32>,
    /// `watches[l]`: clauses watching literal `l`, visited when `l` turns false.
    watches: Vec<Vec<u32>>,
    /// Per variable: 0 false, 1 true, `UNASSIGNED`.
    value: Vec<u8>,
    trail: Vec<u32>,
    /// Per decision level: trail length before the decision, and whether
    /// the decision is already the flipped (false) branch.
    levels: Vec<(usize, bool)>,
    head: usize,
    cursor: u32,
}

impl Solver {
    fn lit_value(&self, l: u32) -> u8 {
        match self.value[(l >> 1) as usize] {
            UNASSIGNED => UNASSIGNED,
            v => v ^ (l & 1) as u8,
        }
    }

    fn assign(&mut self, l: u32) {
        self.value[(l >> 1) as usize] = 1 ^ (l & 1) as u8;
        self.trail.push(l);
    }

    fn clause(&self, c: u32) -> std::ops::Range<usize> {
        self.starts[c as usize] as usize..self.starts[c as usize + 1] as usize
    }

    /// Returns false on conflict.
    fn propagate(&mut self, budget: &mut u64) -> bool {
        while self.head < self.trail.len() {
            let falsified = self.trail[self.head] ^ 1;
            self.head += 1;
            *budget += 1;
            let mut watching = std::mem::take(&mut self.watches[falsified as usize]);
            let mut i = 0;
            let mut ok = true;
            while i < watching.len() {
                let c = watching[i];
                let r = self.clause(c);
                let base = r.start;
                if self.lits[base] == falsified {
                    self.lits.swap(base, base + 1);
                }
                let other = self.lits[base];
                if self.lit_value(other) == 1 {
                    i += 1;
                    continue;
                }
                let replacement = (base + 2..r.end).find(|&p| self.lit_value(self.lits[p]) != 0);
                if let Some(p) = replacement {
                    self.lits.swap(base + 1, p);
                    self.watches[self.lits[base + 1] as usize].push(c);
                    watching.swap_remove(i);
                    continue;
                }
                if self.lit_value(other) == 0 {
                    ok = false;
                    break;
                }
                self.assign(other);
                i += 1;
            }
            self.watches[falsified as usize] = watching;
            if !ok {
                return false;
            }
        }
        true
    }

    fn undo_to(&mut self, len: usize) {
        for &l in &self.trail[len..] {
            let v = l >> 1;
            self.value[v as usize] = UNASSIGNED;
            self.cursor = self.cursor.min(v);
        }
        self.trail.truncate(len);
        self.head = len;
    }

    fn next_unassigned(&mut self) -> Option<u32> {
        let n = self.value.len() as u32;
        while self.cursor < n && self.value[self.cursor as usize] != UNASSIGNED {
            self.cursor += 1;
        }
        (self.cursor < n).then_some(self.cursor)
    }
}

/// Solves `f`; `time_limit` exceeded gives [`Status::Unknown`].
pub fn solve_internal(f: &CnfFormula, time_limit: Option<Duration>) -> SolveResult {
    let start = Instant::now();
    let finish = |status: Status, model: Option<Vec<bool>>| SolveResult {
        status,
        model,
        elapsed: start.elapsed(),
        solver_id: SOLVER_ID.to_string(),
    };
    if f.num_clauses() > MAX_CLAUSES {
        return finish(Status::Unknown, None);
    }
    let vars = f.var_count() as usize;
    let mut s = Solver {
        lits: Vec::new(),
        starts: vec![0],
        watches: vec![Vec::new(); 2 * vars + 2],
        value: vec![UNASSIGNED; vars + 1],
        trail: Vec::new(),
        levels: Vec::new(),
        head: 0,
        cursor: 1,
    };
    // Variable 0 does not exist; keep it permanently assigned.
    s.value[0] = 0;
    let mut units = Vec::new();
    for raw in f.clauses() {
        let mut clause = raw.clone();
        clause.sort_unstable_by_key(|l| (l.unsigned_abs(), *l));
        clause.dedup();
        if clause.windows(2).any(|w| w[0] == -w[1]) {
            continue;
        }
        match clause.len() {
            0 => return finish(Status::Unsat, None),
            1 => units.push(code(clause[0])),
            _ => {
                let c = (s.starts.len() - 1) as u32;
                s.lits.extend(clause.iter().map(|&l| code(l)));
                s.starts.push(s.lits.len() as u32);
                s.watches[code(clause[0]) as usize].push(c);
                s.watches[code(clause[1]) as usize].push(c);
            }
        }
    }
    for u in units {
        match s.lit_value(u) {
            0 => return finish(Status::Unsat, None),
            1 => {}
            _ => s.assign(u),
        }
    }

    let deadline = time_limit.map(|t| start + t);
    let mut work = 0u64;
    let mut next_check = 0u64;
    loop {
        if !s.propagate(&mut work) {
            // Chronological backtracking to the deepest unflipped decision.
            loop {
                match s.levels.pop() {
                    None => return finish(Status::Unsat, None),
                    Some((len, true)) => s.undo_to(len),
                    Some((len, false)) => {
                        let decision = s.trail[len];
                        s.undo_to(len);
                        s.levels.push((len, true));
                        s.assign(decision ^ 1);
                        break;
                    }
                }
            }
        } else {
            let Some(v) = s.next_unassigned() else {
                let model = s.value.iter().map(|&b| b == 1).collect();
                return finish(Status::Sat, Some(model));
            };
            s.levels.push((s.trail.len(), false));
            s.assign(v << 1);
        }
        work += 1;
        if work >= next_check {
            next_check = work + 4096;
            if deadline.is_some_and(|d| Instant::now() >= d) {
                return finish(Status::Unknown, None);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnf::Lit;
    use proptest::prelude::*;

    fn cnf(vars: u32, clauses: &[&[i32]]) -> CnfFormula {
        CnfFormula::from_clauses(vars, clauses.iter().map(|c| c.to_vec()).collect())
    }

    fn brute_force_sat(f: &CnfFormula) -> bool {
        let n = f.var_count() as usize;
        (0..1u64 << n).any(|mask| {
            let model: Vec<bool> = std::iter::once(false)
                .chain((0..n).map(|b| mask >> b & 1 == 1))
                .collect();
            f.is_satisfied_by(&model)
        })
    }

    #[test]
    fn micro_instances() {
        assert_eq!(solve_internal(&cnf(1, &[&[1], &[-1]]), None).status, Status::Unsat);
        let r = solve_internal(&cnf(2, &[&[1, 2]]), None);
        assert_eq!(r.status, Status::Sat);
        let m = r.model.unwrap();
        assert_eq!(m.len(), 3);
        assert!(m[1] || m[2]);
        assert_eq!(solve_internal(&cnf(0, &[]), None).status, Status::Sat);
        assert_eq!(solve_internal(&cnf(1, &[&[]]), None).status, Status::Unsat);
    }

    #[test]
    fn branching_prefers_true() {
        let r = solve_internal(&cnf(3, &[&[-1, -2]]), None);
        assert_eq!(r.model.unwrap(), vec![false, true, false, true]);
    }

    #[test]
    fn pigeonhole_three_into_two() {
        let mut f = CnfFormula::new();
        let p: Vec<Vec<Lit>> = (0..3).map(|_| (0..2).map(|_| f.new_var()).collect()).collect();
        for row in &p {
            f.add_clause(row);
        }
        for h in 0..2 {
            for a in 0..3 {
                for b in a + 1..3 {
                    f.add_clause(&[!p[a][h], !p[b][h]]);
                }
            }
        }
        assert_eq!(solve_internal(&f, None).status, Status::Unsat);
    }

    #[test]
    fn zero_time_limit_is_unknown_on_hard_input() {
        // Pigeonhole 9 into 8 is far beyond one polling interval.
        let mut f = CnfFormula::new();
        let p: Vec<Vec<Lit>> = (0..9).map(|_| (0..8).map(|_| f.new_var()).collect()).collect();
        for row in &p {
            f.add_clause(row);
        }
        for h in 0..8 {
            for a in 0..9 {
                for b in a + 1..9 {
                    f.add_clause(&[!p[a][h], !p[b][h]]);
                }
            }
        }
        let r = solve_internal(&f, Some(Duration::ZERO));
        assert_eq!(r.status, Status::Unknown);
        assert!(r.model.is_none());
    }

    proptest! {
        #[test]
        fn agrees_with_brute_force(clauses in prop::collection::vec(
            prop::collection::vec((1i32..=10, any::<bool>()), 1..4), 0..60)
        ) {
            let clauses: Vec<Vec<i32>> = clauses
                .into_iter()
                .map(|c| c.into_iter().map(|(v, neg)| if neg { -v } else { v }).collect())
                .collect();
            // Unfolded, so duplicate and complementary literals reach the solver.
            let f = CnfFormula::from_clauses(10, clauses);
            let r = solve_internal(&f, None);
            prop_assert_eq!(r.status == Status::Sat, brute_force_sat(&f));
            if let Some(m) = r.model {
                prop_assert!(f.is_satisfied_by(&m));
            }
        }
    }
}
