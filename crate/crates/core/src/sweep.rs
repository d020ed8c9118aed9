//! End-to-end solving of one configuration, and sweeps over subgroup
//! orders that tabulate how many subgroups admit a coset family.

use std::fmt::Write as _;
use std::time::Duration;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::encoder::{build, decode, verify_decoded, HSetting, Mode, ModelConfig, RightSemantics};
use crate::error::{Error, Result};
use crate::family::Family;
use crate::groups::{conjugacy_classes, subgroups_of_order, sweep_orders, Subgroup};
use crate::solver::{solve, Backend, Status};

/// Bumped whenever a field of [`SweepReport`] changes meaning.
pub const REPORT_VERSION: u32 = 1;

/// Result of building, solving, decoding and verifying one configuration.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub status: Status,
    pub elapsed: Duration,
    pub solver_id: String,
    pub vars: u32,
    pub clauses: usize,
    /// The decoded family; present exactly when the status is SAT.
    pub family: Option<Family>,
}

/// Solves `cfg`. A SAT answer is decoded and re-verified; a family that
/// fails verification is an error, never a result.
pub fn solve_config(cfg: &ModelConfig, backend: &Backend, time_limit: Option<Duration>) -> Result<Outcome> {
    let (f, map) = build(cfg)?;
    let r = solve(&f, backend, time_limit)?;
    let family = match (&r.status, &r.model) {
        (Status::Sat, Some(model)) => {
            let fam = decode(model, &map)?;
            let report = verify_decoded(&fam, &map)?;
            if !report.holds {
                return Err(Error::Decode(format!("decoded family fails verification: {report}")));
            }
            Some(fam)
        }
        (Status::Sat, None) => return Err(Error::Solver("satisfiable without a model".into())),
        _ => None,
    };
    Ok(Outcome {
        status: r.status,
        elapsed: r.elapsed,
        solver_id: r.solver_id,
        vars: f.var_count(),
        clauses: f.num_clauses(),
        family,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepMode {
    Pure,
    Left,
    Right,
}

#[derive(Clone, Debug)]
pub struct SweepOptions {
    pub n: usize,
    pub k: usize,
    pub d: usize,
    pub modes: Vec<SweepMode>,
    /// Subgroup orders to visit; `None` means every order dividing `d`
    /// and `n!`.
    pub orders: Option<Vec<usize>>,
    pub h: HSetting,
    pub rankwise: bool,
    pub right_semantics: RightSemantics,
    pub time_limit: Option<Duration>,
    /// Worker threads; 0 lets the pool decide.
    pub jobs: usize,
    /// Candidate subgroups to use instead of enumerating `S_n`. Each one
    /// is its own candidate in both coset modes.
    pub groups: Option<Vec<Subgroup>>,
}

impl SweepOptions {
    pub fn new(n: usize, k: usize, d: usize, modes: Vec<SweepMode>) -> Self {
        SweepOptions {
            n,
            k,
            d,
            modes,
            orders: None,
            h: HSetting::Auto,
            rankwise: false,
            right_semantics: RightSemantics::Columns,
            time_limit: None,
            jobs: 0,
            groups: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubgroupRow {
    /// Generators in generator-file syntax.
    pub generators: String,
    /// Subgroups represented by this row: the conjugacy class size for
    /// left cosets, 1 otherwise.
    pub class_size: usize,
    pub status: Status,
    pub elapsed_s: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrderRow {
    pub mode: SweepMode,
    pub order: usize,
    /// Candidates that exist: conjugacy classes for left cosets, subgroups
    /// for right cosets.
    pub existing: usize,
    pub considered: usize,
    pub feasible: usize,
    pub infeasible: usize,
    pub timeout: usize,
    pub avg_feasible_s: Option<f64>,
    pub avg_infeasible_s: Option<f64>,
    pub subgroups: Vec<SubgroupRow>,
}

impl OrderRow {
    fn from_rows(mode: SweepMode, order: usize, existing: usize, subgroups: Vec<SubgroupRow>) -> Self {
        let count = |s: Status| subgroups.iter().filter(|r| r.status == s).count();
        let avg = |s: Status| {
            let times: Vec<f64> = subgroups.iter().filter(|r| r.status == s).map(|r| r.elapsed_s).collect();
            (!times.is_empty()).then(|| times.iter().sum::<f64>() / times.len() as f64)
        };
        OrderRow {
            mode,
            order,
            existing,
            considered: subgroups.len(),
            feasible: count(Status::Sat),
            infeasible: count(Status::Unsat),
            timeout: count(Status::Unknown),
            avg_feasible_s: avg(Status::Sat),
            avg_infeasible_s: avg(Status::Unsat),
            subgroups,
        }
    }

    /// Counts partition the considered candidates.
    pub fn is_consistent(&self) -> bool {
        self.feasible + self.infeasible + self.timeout == self.considered
            && self.considered <= self.existing
            && self.considered == self.subgroups.len()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub version: u32,
    pub n: usize,
    pub k: usize,
    pub d: usize,
    pub h: usize,
    pub rankwise: bool,
    pub right_semantics: RightSemantics,
    pub solver: String,
    pub time_limit_s: Option<f64>,
    pub rows: Vec<OrderRow>,
}

impl SweepReport {
    pub fn is_consistent(&self) -> bool {
        self.rows.iter().all(OrderRow::is_consistent)
    }

    pub fn row(&self, mode: SweepMode, order: usize) -> Option<&OrderRow> {
        self.rows.iter().find(|r| r.mode == mode && r.order == order)
    }

    /// Zeroes every timing so reports from different runs compare equal.
    pub fn strip_timings(&mut self) {
        for row in &mut self.rows {
            for s in &mut row.subgroups {
                s.elapsed_s = 0.0;
            }
            row.avg_feasible_s = row.avg_feasible_s.map(|_| 0.0);
            row.avg_infeasible_s = row.avg_infeasible_s.map(|_| 0.0);
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            msg: e.to_string(),
        })
    }

    /// Plain-text table, one line per mode and order.
    pub fn table(&self) -> String {
        let secs = |t: Option<f64>| t.map_or_else(|| "-".to_string(), |t| format!("{t:.3}"));
        let mut out = format!(
            "d={} n={} k={}\n{:<6} {:>4} {:>6} {:>6} {:>5} {:>7} {:>5} {:>12} {:>12}\n",
            self.d, self.n, self.k, "mode", "|G|", "#exst", "#cnsd", "feas", "infeas", "t/o", "avg_t_feas", "avg_t_infeas"
        );
        for r in &self.rows {
            let mode = match r.mode {
                SweepMode::Pure => "pure",
                SweepMode::Left => "L",
                SweepMode::Right => "R",
            };
            let _ = writeln!(
                out,
                "{:<6} {:>4} {:>6} {:>6} {:>5} {:>7} {:>5} {:>12} {:>12}",
                mode,
                r.order,
                r.existing,
                r.considered,
                r.feasible,
                r.infeasible,
                r.timeout,
                secs(r.avg_feasible_s),
                secs(r.avg_infeasible_s)
            );
        }
        out
    }
}

struct Task {
    row: usize,
    cfg: ModelConfig,
    generators: String,
    class_size: usize,
}

/// Runs every configured mode over every selected order. Left cosets use
/// one representative per conjugacy class; right cosets use every
/// subgroup and skip the trivial group, which is the pure model.
pub fn sweep(opts: &SweepOptions, backend: &Backend) -> Result<SweepReport> {
    let (n, k, d) = (opts.n, opts.k, opts.d);
    let mut base = ModelConfig::new(n, k, d);
    base.h = opts.h;
    base.rankwise = opts.rankwise;
    base.right_semantics = opts.right_semantics;
    let h = base.validate()?;
    if let Some(bad) = opts.groups.iter().flatten().find(|g| g.n() != n) {
        return Err(Error::SizeMismatch {
            expected: n,
            found: bad.n(),
        });
    }
    let all = sweep_orders(n, d)?;
    let orders = match &opts.orders {
        None => match &opts.groups {
            Some(given) => all.into_iter().filter(|&q| given.iter().any(|g| g.order() == q)).collect(),
            None => all,
        },
        Some(list) => {
            if let Some(bad) = list.iter().find(|q| !all.contains(q)) {
                return Err(Error::InvalidConfig(format!("order {bad} does not divide both d = {d} and {n}!")));
            }
            let mut list = list.clone();
            list.sort_unstable_by(|a, b| b.cmp(a));
            list.dedup();
            list
        }
    };

    let mut heads: Vec<(SweepMode, usize, usize)> = Vec::new();
    let mut tasks: Vec<Task> = Vec::new();
    let mut push_task = |heads: &[(SweepMode, usize, usize)], mode: Mode, g: &Subgroup, class_size: usize| {
        tasks.push(Task {
            row: heads.len() - 1,
            cfg: ModelConfig {
                mode,
                ..base.clone()
            },
            generators: g.generator_line(),
            class_size,
        });
    };
    for &mode in &opts.modes {
        match mode {
            SweepMode::Pure => {
                heads.push((mode, 1, 1));
                push_task(&heads, Mode::Pure, &Subgroup::trivial(n), 1);
            }
            SweepMode::Left => {
                for &q in &orders {
                    if let Some(given) = &opts.groups {
                        let subs: Vec<&Subgroup> = given.iter().filter(|g| g.order() == q).collect();
                        heads.push((mode, q, subs.len()));
                        for g in subs {
                            push_task(&heads, Mode::Left(g.clone()), g, 1);
                        }
                        continue;
                    }
                    let classes = conjugacy_classes(&subgroups_of_order(n, q)?, n)?;
                    heads.push((mode, q, classes.len()));
                    for c in &classes {
                        push_task(&heads, Mode::Left(c.representative.clone()), &c.representative, c.size);
                    }
                }
            }
            SweepMode::Right => {
                for &q in orders.iter().filter(|&&q| q > 1) {
                    let subs = match &opts.groups {
                        Some(given) => given.iter().filter(|g| g.order() == q).cloned().collect(),
                        None => subgroups_of_order(n, q)?,
                    };
                    heads.push((mode, q, subs.len()));
                    for g in &subs {
                        push_task(&heads, Mode::Right(g.clone()), g, 1);
                    }
                }
            }
        }
    }

    let run = |t: &Task| -> Result<SubgroupRow> {
        let out = solve_config(&t.cfg, backend, opts.time_limit)?;
        Ok(SubgroupRow {
            generators: t.generators.clone(),
            class_size: t.class_size,
            status: out.status,
            elapsed_s: out.elapsed.as_secs_f64(),
        })
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.jobs)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("cannot start worker pool: {e}")))?;
    let results: Vec<SubgroupRow> = pool.install(|| tasks.par_iter().map(run).collect::<Result<_>>())?;

    let mut grouped: Vec<Vec<SubgroupRow>> = vec![Vec::new(); heads.len()];
    for (t, r) in tasks.iter().zip(results) {
        grouped[t.row].push(r);
    }
    let rows = heads
        .into_iter()
        .zip(grouped)
        .map(|((mode, q, existing), subs)| OrderRow::from_rows(mode, q, existing, subs))
        .collect();
    let solver = backend.id();
    Ok(SweepReport {
        version: REPORT_VERSION,
        n,
        k,
        d,
        h,
        rankwise: opts.rankwise,
        right_semantics: opts.right_semantics,
        solver,
        time_limit_s: opts.time_limit.map(|t| t.as_secs_f64()),
        rows,
    })
}
