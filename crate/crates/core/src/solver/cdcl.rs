//! Conflict-driven clause learning: first-UIP learning with local
//! minimisation, activity-ordered branching with saved phases, Luby
//! restarts and periodic removal of high-LBD learnt clauses. Everything is
//! deterministic: ties in activity go to the lowest variable id.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::time::{Duration, Instant};

use crate::cnf::CnfFormula;

use super::dpll::MAX_CLAUSES;
use super::{SolveResult, Status};

pub const SOLVER_ID: &str = "internal-cdcl";

const UNASSIGNED: u8 = 2;
const NO_REASON: u32 = u32::MAX;
const RESTART_UNIT: u64 = 100;
const ACTIVITY_DECAY: f64 = 0.95;

fn code(lit: i32) -> u32 {
    (lit.unsigned_abs() << 1) | u32::from(lit < 0)
}

fn lit_value(value: &[u8], l: u32) -> u8 {
    match value[(l >> 1) as usize] {
        UNASSIGNED => UNASSIGNED,
        v => v ^ (l & 1) as u8,
    }
}

/// `i`-th element (from 0) of the Luby sequence 1 1 2 1 1 2 4 ...
fn luby(mut i: u64) -> u64 {
    let mut size = 1;
    let mut seq = 0;
    while size < i + 1 {
        seq += 1;
        size = 2 * size + 1;
    }
    while size - 1 != i {
        size = (size - 1) >> 1;
        seq -= 1;
        i %= size;
    }
    1 << seq
}

struct Clause {
    lits: Vec<u32>,
    learnt: bool,
    lbd: u32,
}

#[derive(Clone, Copy)]
struct Watch {
    clause: u32,
    blocker: u32,
}

struct Solver {
    clauses: Vec<Clause>,
    watches: Vec<Vec<Watch>>,
    value: Vec<u8>,
    level: Vec<u32>,
    reason: Vec<u32>,
    phase: Vec<bool>,
    activity: Vec<f64>,
    var_inc: f64,
    heap: BinaryHeap<(u64, Reverse<u32>)>,
    seen: Vec<bool>,
    trail: Vec<u32>,
    trail_lim: Vec<usize>,
    head: usize,
    learnts: usize,
}

impl Solver {
    fn decision_level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    fn assign(&mut self, l: u32, reason: u32) {
        let v = (l >> 1) as usize;
        self.value[v] = 1 ^ (l & 1) as u8;
        self.level[v] = self.decision_level();
        self.reason[v] = reason;
        self.trail.push(l);
    }

    fn push_heap(&mut self, v: u32) {
        self.heap.push((self.activity[v as usize].to_bits(), Reverse(v)));
    }

    fn bump(&mut self, v: u32) {
        self.activity[v as usize] += self.var_inc;
        if self.activity[v as usize] > 1e100 {
            for a in &mut self.activity {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
            self.rebuild_heap();
        } else if self.value[v as usize] == UNASSIGNED {
            self.push_heap(v);
        }
    }

    fn rebuild_heap(&mut self) {
        self.heap.clear();
        for v in 1..self.value.len() as u32 {
            if self.value[v as usize] == UNASSIGNED {
                self.push_heap(v);
            }
        }
    }

    fn watch(&mut self, c: u32) {
        let lits = &self.clauses[c as usize].lits;
        let (a, b) = (lits[0], lits[1]);
        self.watches[a as usize].push(Watch { clause: c, blocker: b });
        self.watches[b as usize].push(Watch { clause: c, blocker: a });
    }

    /// Returns the conflicting clause, if any.
    fn propagate(&mut self, work: &mut u64) -> Option<u32> {
        while self.head < self.trail.len() {
            let falsified = self.trail[self.head] ^ 1;
            self.head += 1;
            *work += 1;
            let mut ws = std::mem::take(&mut self.watches[falsified as usize]);
            let (mut i, mut j) = (0, 0);
            let mut conflict = None;
            while i < ws.len() {
                let w = ws[i];
                i += 1;
                if lit_value(&self.value, w.blocker) == 1 {
                    ws[j] = w;
                    j += 1;
                    continue;
                }
                let lits = &mut self.clauses[w.clause as usize].lits;
                if lits[0] == falsified {
                    lits.swap(0, 1);
                }
                let first = lits[0];
                let kept = Watch {
                    clause: w.clause,
                    blocker: first,
                };
                if first != w.blocker && lit_value(&self.value, first) == 1 {
                    ws[j] = kept;
                    j += 1;
                    continue;
                }
                if let Some(k) = (2..lits.len()).find(|&k| lit_value(&self.value, lits[k]) != 0) {
                    lits.swap(1, k);
                    let moved = lits[1];
                    self.watches[moved as usize].push(kept);
                    continue;
                }
                ws[j] = kept;
                j += 1;
                if lit_value(&self.value, first) == 0 {
                    conflict = Some(w.clause);
                    while i < ws.len() {
                        ws[j] = ws[i];
                        i += 1;
                        j += 1;
                    }
                } else {
                    self.assign(first, w.clause);
                }
            }
            ws.truncate(j);
            self.watches[falsified as usize] = ws;
            if conflict.is_some() {
                self.head = self.trail.len();
                return conflict;
            }
        }
        None
    }

    /// First-UIP clause for `conflict`, asserting literal first and the
    /// highest remaining level second. Returns it with its LBD.
    fn analyze(&mut self, mut conflict: u32) -> (Vec<u32>, u32) {
        let current = self.decision_level();
        let mut learnt = vec![0u32];
        let mut pending = 0;
        let mut idx = self.trail.len();
        let mut skip_first = false;
        loop {
            let lits = std::mem::take(&mut self.clauses[conflict as usize].lits);
            for &q in &lits[usize::from(skip_first)..] {
                let v = (q >> 1) as usize;
                if !self.seen[v] && self.level[v] > 0 {
                    self.seen[v] = true;
                    self.bump(v as u32);
                    if self.level[v] >= current {
                        pending += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            self.clauses[conflict as usize].lits = lits;
            loop {
                idx -= 1;
                if self.seen[(self.trail[idx] >> 1) as usize] {
                    break;
                }
            }
            let p = self.trail[idx];
            let v = (p >> 1) as usize;
            self.seen[v] = false;
            pending -= 1;
            if pending == 0 {
                learnt[0] = p ^ 1;
                break;
            }
            conflict = self.reason[v];
            skip_first = true;
        }

        // A literal is redundant when its reason is covered by the clause.
        let all: Vec<u32> = learnt.clone();
        learnt.retain(|&q| {
            let v = (q >> 1) as usize;
            let r = self.reason[v];
            if q == all[0] || r == NO_REASON {
                return true;
            }
            !self.clauses[r as usize].lits[1..].iter().all(|&x| {
                let u = (x >> 1) as usize;
                self.seen[u] || self.level[u] == 0
            })
        });
        for &q in &all {
            self.seen[(q >> 1) as usize] = false;
        }

        if learnt.len() > 1 {
            let best = (1..learnt.len())
                .max_by_key(|&i| (self.level[(learnt[i] >> 1) as usize], Reverse(i)))
                .unwrap_or(1);
            learnt.swap(1, best);
        }
        let mut levels: Vec<u32> = learnt.iter().map(|&q| self.level[(q >> 1) as usize]).collect();
        levels.sort_unstable();
        levels.dedup();
        self.var_inc /= ACTIVITY_DECAY;
        (learnt, levels.len() as u32)
    }

    fn cancel_until(&mut self, level: u32) {
        if self.decision_level() <= level {
            return;
        }
        let len = self.trail_lim[level as usize];
        for k in (len..self.trail.len()).rev() {
            let l = self.trail[k];
            let v = l >> 1;
            self.phase[v as usize] = l & 1 == 0;
            self.value[v as usize] = UNASSIGNED;
            self.reason[v as usize] = NO_REASON;
            self.push_heap(v);
        }
        self.trail.truncate(len);
        self.trail_lim.truncate(level as usize);
        self.head = len;
    }

    fn pick_branch(&mut self) -> Option<u32> {
        while let Some((bits, Reverse(v))) = self.heap.pop() {
            if self.value[v as usize] == UNASSIGNED && bits == self.activity[v as usize].to_bits() {
                return Some(v);
            }
        }
        None
    }

    /// Drops the worse half of the learnt clauses with LBD above 2. Only
    /// called at level 0, where no kept reason is ever consulted again.
    fn reduce(&mut self) {
        let mut order: Vec<usize> = (0..self.clauses.len())
            .filter(|&c| self.clauses[c].learnt && self.clauses[c].lbd > 2)
            .collect();
        order.sort_by_key(|&c| (Reverse(self.clauses[c].lbd), Reverse(self.clauses[c].lits.len()), c));
        let mut drop = vec![false; self.clauses.len()];
        for &c in &order[..order.len() / 2] {
            drop[c] = true;
        }
        let mut k = 0;
        self.clauses.retain(|_| {
            k += 1;
            !drop[k - 1]
        });
        self.learnts = self.clauses.iter().filter(|c| c.learnt).count();
        for r in &mut self.reason {
            *r = NO_REASON;
        }
        for w in &mut self.watches {
            w.clear();
        }
        for c in 0..self.clauses.len() as u32 {
            self.watch(c);
        }
    }
}

/// Solves `f` by clause learning; `time_limit` exceeded gives
/// [`Status::Unknown`]. Answers agree with [`super::solve_internal`].
pub fn solve_cdcl(f: &CnfFormula, time_limit: Option<Duration>) -> SolveResult {
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
        clauses: Vec::new(),
        watches: vec![Vec::new(); 2 * vars + 2],
        value: vec![UNASSIGNED; vars + 1],
        level: vec![0; vars + 1],
        reason: vec![NO_REASON; vars + 1],
        phase: vec![true; vars + 1],
        activity: vec![0.0; vars + 1],
        var_inc: 1.0,
        heap: BinaryHeap::new(),
        seen: vec![false; vars + 1],
        trail: Vec::new(),
        trail_lim: Vec::new(),
        head: 0,
        learnts: 0,
    };
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
                s.clauses.push(Clause {
                    lits: clause.iter().map(|&l| code(l)).collect(),
                    learnt: false,
                    lbd: 0,
                });
                s.watch((s.clauses.len() - 1) as u32);
            }
        }
    }
    for u in units {
        match lit_value(&s.value, u) {
            0 => return finish(Status::Unsat, None),
            1 => {}
            _ => s.assign(u, NO_REASON),
        }
    }
    s.rebuild_heap();

    let deadline = time_limit.map(|t| start + t);
    let mut work = 0u64;
    let mut next_check = 0u64;
    let mut restarts = 0u64;
    let mut conflicts_left = luby(0) * RESTART_UNIT;
    let mut max_learnts = s.clauses.len() / 3 + 2000;
    loop {
        if let Some(conflict) = s.propagate(&mut work) {
            if s.decision_level() == 0 {
                return finish(Status::Unsat, None);
            }
            let (learnt, lbd) = s.analyze(conflict);
            let back = learnt.get(1).map_or(0, |&q| s.level[(q >> 1) as usize]);
            s.cancel_until(back);
            if learnt.len() == 1 {
                s.assign(learnt[0], NO_REASON);
            } else {
                let asserting = learnt[0];
                s.clauses.push(Clause {
                    lits: learnt,
                    learnt: true,
                    lbd,
                });
                let c = (s.clauses.len() - 1) as u32;
                s.watch(c);
                s.assign(asserting, c);
                s.learnts += 1;
            }
            conflicts_left = conflicts_left.saturating_sub(1);
        } else if conflicts_left == 0 {
            restarts += 1;
            conflicts_left = luby(restarts) * RESTART_UNIT;
            s.cancel_until(0);
            if s.learnts >= max_learnts {
                s.reduce();
                max_learnts += max_learnts / 10;
            }
        } else {
            let Some(v) = s.pick_branch() else {
                let model = s.value.iter().map(|&b| b == 1).collect();
                return finish(Status::Sat, Some(model));
            };
            s.trail_lim.push(s.trail.len());
            let l = (v << 1) | u32::from(!s.phase[v as usize]);
            s.assign(l, NO_REASON);
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
