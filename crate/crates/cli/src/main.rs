//! `minwise`: encode, solve and check k-restricted minwise independent
//! permutation families.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{error::ErrorKind, Args, Parser, Subcommand, ValueEnum};

use minwise_core::bijection::{count_by_class, phi, phi_inverse};
use minwise_core::bounds::{bargachev_bound, factorial, lcm_upto, lower_bound, upper_bound};
use minwise_core::encoder::{build, decode, describe, verify_decoded, DecodeMap, HSetting, Mode, ModelConfig, RightSemantics};
use minwise_core::family::{jaccard_pairs, verify_minwise, verify_rankwise};
use minwise_core::groups::{conjugacy_classes, parse_generator_file, subgroups_of_order, Subgroup, MAX_ENUMERATION_N};
use minwise_core::solver::{parse_dimacs, solve, write_dimacs, Backend, Status};
use minwise_core::sweep::{solve_config, sweep, SweepMode, SweepOptions};
use minwise_core::{Error, Family, Permutation};

const EXIT_OK: u8 = 0;
const EXIT_USAGE: u8 = 1;
const EXIT_NEGATIVE: u8 = 2;
const EXIT_SOLVER: u8 = 3;

#[derive(Parser)]
#[command(name = "minwise", version, about = "SAT search for k-restricted minwise independent permutation families")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the CNF model of a configuration and its decode map.
    Encode {
        #[command(flatten)]
        model: ModelArgs,
        /// DIMACS output path.
        #[arg(long)]
        out: PathBuf,
        /// Decode map path [default: <out>.map].
        #[arg(long)]
        map: Option<PathBuf>,
    },
    /// Solve a configuration (or a previously encoded CNF) and print the family.
    Solve {
        #[command(flatten)]
        model: OptionalModelArgs,
        /// Solve this DIMACS file instead of encoding; needs --map.
        #[arg(long, requires = "map")]
        cnf: Option<PathBuf>,
        /// Decode map written by `encode`.
        #[arg(long, requires = "cnf")]
        map: Option<PathBuf>,
        #[command(flatten)]
        solver: SolverArgs,
        /// Write the family here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a family file for minwise (or rankwise) independence.
    Verify {
        family: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        rankwise: bool,
    },
    /// Enumerate subgroups of S_n by order, with conjugacy classes.
    Groups {
        #[arg(long)]
        n: usize,
        /// Comma-separated orders, or `all` for every order dividing n!.
        #[arg(long, default_value = "all")]
        orders: String,
        /// Print generators of every subgroup (or class representative).
        #[arg(long)]
        list: bool,
        /// Only class representatives in --list and --out.
        #[arg(long)]
        representatives: bool,
        /// Write a generator file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve every candidate subgroup of the chosen orders and tabulate.
    Sweep {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        d: usize,
        #[arg(long, value_enum, default_value = "both")]
        mode: SweepChoice,
        /// Comma-separated subgroup orders, or `all` (every order dividing d and n!).
        #[arg(long, default_value = "all")]
        orders: String,
        #[arg(long = "H", default_value = "auto")]
        h: HSetting,
        #[arg(long)]
        rankwise: bool,
        /// Permute T-matrix rows by γ instead of reordering columns.
        #[arg(long)]
        paper_literal_right: bool,
        /// Take candidate subgroups from this generator file.
        #[arg(long)]
        group_file: Option<PathBuf>,
        /// JSON report path.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Worker threads (0 = one per core).
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Print the size bounds for (n, k).
    Bounds {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
    },
    /// The fixed-point / waste-index bijection.
    Bijection {
        #[command(subcommand)]
        op: BijectionOp,
    },
    /// Extend a k-restricted family (odd k) to level k+1 with the order reversal.
    Double {
        family: PathBuf,
        #[arg(long, default_value_t = 3)]
        k: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Restrict a family to its first n symbols.
    Restrict {
        family: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Confirm min-collision probability equals Jaccard similarity for |A ∪ B| ≤ k.
    MinhashCheck {
        family: PathBuf,
        #[arg(long)]
        k: usize,
        /// Run even when the family fails verification at level k.
        #[arg(long)]
        force: bool,
    },
}

#[derive(Subcommand)]
enum BijectionOp {
    /// Map a permutation with k fixed points to one with k waste indices.
    Phi {
        #[arg(required = true, num_args = 1..)]
        perm: Vec<String>,
    },
    /// The inverse map.
    PhiInverse {
        #[arg(required = true, num_args = 1..)]
        perm: Vec<String>,
    },
    /// Tabulate permutations of [n] by fixed points and by waste indices.
    Counts {
        #[arg(long)]
        n: usize,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeChoice {
    Pure,
    Left,
    Right,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SweepChoice {
    Pure,
    Left,
    Right,
    Both,
}

#[derive(Args)]
struct ModelArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    d: usize,
    #[command(flatten)]
    rest: ModelExtra,
}

#[derive(Args)]
struct OptionalModelArgs {
    #[arg(long, required_unless_present = "cnf", conflicts_with = "cnf")]
    n: Option<usize>,
    #[arg(long, required_unless_present = "cnf", conflicts_with = "cnf")]
    k: Option<usize>,
    #[arg(long, required_unless_present = "cnf", conflicts_with = "cnf")]
    d: Option<usize>,
    #[command(flatten)]
    rest: ModelExtra,
}

#[derive(Args)]
struct ModelExtra {
    #[arg(long, value_enum, default_value = "pure")]
    mode: ModeChoice,
    /// Subgroup generators for coset modes, e.g. "2 1 3 4; 2 3 1 4".
    #[arg(long)]
    group: Option<String>,
    /// Take the subgroup from the first line of a generator file.
    #[arg(long, conflicts_with = "group")]
    group_file: Option<PathBuf>,
    /// Lex-chain prefix length: an integer, auto, off or full.
    #[arg(long = "H", default_value = "auto")]
    h: HSetting,
    #[arg(long)]
    rankwise: bool,
    /// Do not fix the first member to the identity.
    #[arg(long)]
    no_fix_first: bool,
    /// Permute T-matrix rows by γ instead of reordering columns.
    #[arg(long)]
    paper_literal_right: bool,
}

#[derive(Args)]
struct SolverArgs {
    /// External solver command; `{cnf}` is the input path, `{model}` an optional output path.
    #[arg(long, conflicts_with_all = ["internal", "cdcl"])]
    solver_cmd: Option<String>,
    /// Use the built-in DPLL solver even when MINWISE_SOLVER is set.
    #[arg(long, conflicts_with = "cdcl")]
    internal: bool,
    /// Use the built-in clause-learning solver.
    #[arg(long)]
    cdcl: bool,
    /// Per-instance limit in seconds.
    #[arg(long)]
    time_limit: Option<f64>,
}

impl SolverArgs {
    fn backend(&self) -> Backend {
        match (&self.solver_cmd, self.internal, self.cdcl) {
            (Some(cmd), _, _) => Backend::External(cmd.clone()),
            (None, true, _) => Backend::Internal,
            (None, _, true) => Backend::Cdcl,
            _ => Backend::from_env(),
        }
    }

    fn limit(&self) -> Result<Option<Duration>, Error> {
        self.time_limit
            .map(|s| Duration::try_from_secs_f64(s).map_err(|_| Error::InvalidConfig(format!("bad time limit {s}"))))
            .transpose()
    }
}

fn single_group(text: &str, n: usize) -> Result<Subgroup, Error> {
    let first = text
        .lines()
        .map(str::trim)
        .find(|l| !l.is_empty() && !l.starts_with('#'))
        .ok_or_else(|| Error::InvalidConfig("no subgroup given".into()))?;
    let g = parse_generator_file(first)?
        .pop()
        .ok_or_else(|| Error::InvalidConfig("no subgroup given".into()))?;
    if g.n() != n {
        return Err(Error::SizeMismatch { expected: n, found: g.n() });
    }
    Ok(g)
}

impl ModelExtra {
    fn config(&self, n: usize, k: usize, d: usize) -> Result<ModelConfig, Error> {
        let group = match (&self.group, &self.group_file) {
            (Some(g), _) => Some(single_group(g, n)?),
            (None, Some(path)) => Some(single_group(&fs::read_to_string(path)?, n)?),
            (None, None) => None,
        };
        let mode = match (self.mode, group) {
            (ModeChoice::Pure, None) => Mode::Pure,
            (ModeChoice::Pure, Some(_)) => {
                return Err(Error::InvalidConfig("a subgroup was given for pure mode".into()))
            }
            (_, None) => return Err(Error::InvalidConfig("coset modes need --group or --group-file".into())),
            (ModeChoice::Left, Some(g)) => Mode::Left(g),
            (ModeChoice::Right, Some(g)) => Mode::Right(g),
        };
        let mut cfg = ModelConfig::new(n, k, d).with_mode(mode).with_h(self.h);
        cfg.rankwise = self.rankwise;
        cfg.fix_first = !self.no_fix_first;
        cfg.right_semantics = semantics(self.paper_literal_right);
        Ok(cfg)
    }
}

fn semantics(paper_literal: bool) -> RightSemantics {
    if paper_literal {
        RightSemantics::Rows
    } else {
        RightSemantics::Columns
    }
}

fn read_family(path: &Path) -> Result<Family, Error> {
    fs::read_to_string(path)?.parse()
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), Error> {
    match out {
        Some(p) => Ok(fs::write(p, text)?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn parse_perm(tokens: &[String]) -> Result<Permutation, Error> {
    tokens.join(" ").replace(',', " ").parse()
}

fn parse_orders(text: &str) -> Result<Option<Vec<usize>>, Error> {
    if text == "all" {
        return Ok(None);
    }
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| Error::InvalidConfig(format!("bad order {t:?}")))
        })
        .collect::<Result<Vec<_>, _>>()
        .map(Some)
}

fn report_status(status: Status) -> u8 {
    match status {
        Status::Sat => EXIT_OK,
        Status::Unsat => EXIT_NEGATIVE,
        Status::Unknown => EXIT_SOLVER,
    }
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::Encode { model, out, map } => {
            let cfg = model.rest.config(model.n, model.k, model.d)?;
            let (f, dmap) = build(&cfg)?;
            let map_path = map.unwrap_or_else(|| {
                let mut p = out.clone().into_os_string();
                p.push(".map");
                p.into()
            });
            let mut file = fs::File::create(&out)?;
            write_dimacs(&f, &mut file)?;
            fs::write(&map_path, dmap.to_text())?;
            println!("{}", describe(&f, &dmap));
            Ok(EXIT_OK)
        }
        Command::Solve {
            model,
            cnf,
            map,
            solver,
            out,
        } => {
            let backend = solver.backend();
            let limit = solver.limit()?;
            let (status, family, elapsed, solver_id) = match (cnf, map) {
                (Some(cnf), Some(map)) => {
                    let f = parse_dimacs(&fs::read_to_string(&cnf)?)?;
                    let dmap: DecodeMap = fs::read_to_string(&map)?.parse()?;
                    let r = solve(&f, &backend, limit)?;
                    let family = match (&r.status, &r.model) {
                        (Status::Sat, Some(m)) => {
                            let fam = decode(m, &dmap)?;
                            let report = verify_decoded(&fam, &dmap)?;
                            if !report.holds {
                                return Err(Error::Decode(format!("decoded family fails verification: {report}")));
                            }
                            Some(fam)
                        }
                        _ => None,
                    };
                    (r.status, family, r.elapsed, r.solver_id)
                }
                _ => {
                    let (n, k, d) = (model.n.unwrap_or(0), model.k.unwrap_or(0), model.d.unwrap_or(0));
                    let cfg = model.rest.config(n, k, d)?;
                    let o = solve_config(&cfg, &backend, limit)?;
                    (o.status, o.family, o.elapsed, o.solver_id)
                }
            };
            eprintln!("{status} ({solver_id}, {:.3}s)", elapsed.as_secs_f64());
            if let Some(fam) = family {
                emit(&fam.to_string(), out.as_deref())?;
            } else {
                println!("{status}");
            }
            Ok(report_status(status))
        }
        Command::Verify { family, k, rankwise } => {
            let f = read_family(&family)?;
            let report = if rankwise {
                verify_rankwise(&f, k)?
            } else {
                verify_minwise(&f, k)?
            };
            println!("{report}");
            Ok(if report.holds { EXIT_OK } else { EXIT_NEGATIVE })
        }
        Command::Groups {
            n,
            orders,
            list,
            representatives,
            out,
        } => {
            let orders = match parse_orders(&orders)? {
                Some(o) => o,
                None => {
                    if n == 0 || n > MAX_ENUMERATION_N {
                        return Err(Error::OutOfRange(format!("n = {n} not in 1..={MAX_ENUMERATION_N}")));
                    }
                    let total = factorial(n)? as usize;
                    (1..=total).rev().filter(|q| total % q == 0).collect()
                }
            };
            let mut lines = String::new();
            for q in orders {
                let subs = subgroups_of_order(n, q)?;
                let classes = conjugacy_classes(&subs, n)?;
                println!("order {q}: {} subgroups, {} classes", subs.len(), classes.len());
                let chosen: Vec<&Subgroup> = if representatives {
                    classes.iter().map(|c| &c.representative).collect()
                } else {
                    subs.iter().collect()
                };
                for g in chosen {
                    if list {
                        println!("  {}", g.generator_line());
                    }
                    lines.push_str(&g.generator_line());
                    lines.push('\n');
                }
            }
            if let Some(path) = out {
                fs::write(path, lines)?;
            }
            Ok(EXIT_OK)
        }
        Command::Sweep {
            n,
            k,
            d,
            mode,
            orders,
            h,
            rankwise,
            paper_literal_right,
            group_file,
            report,
            jobs,
            solver,
        } => {
            let modes = match mode {
                SweepChoice::Pure => vec![SweepMode::Pure],
                SweepChoice::Left => vec![SweepMode::Left],
                SweepChoice::Right => vec![SweepMode::Right],
                SweepChoice::Both => vec![SweepMode::Left, SweepMode::Right],
            };
            let mut opts = SweepOptions::new(n, k, d, modes);
            opts.orders = parse_orders(&orders)?;
            opts.h = h;
            opts.rankwise = rankwise;
            opts.right_semantics = semantics(paper_literal_right);
            opts.time_limit = solver.limit()?;
            opts.jobs = jobs;
            if let Some(path) = group_file {
                opts.groups = Some(parse_generator_file(&fs::read_to_string(path)?)?);
            }
            let rep = sweep(&opts, &solver.backend())?;
            print!("{}", rep.table());
            if let Some(path) = report {
                fs::write(path, rep.to_json() + "\n")?;
            }
            Ok(EXIT_OK)
        }
        Command::Bounds { n, k } => {
            println!("lcm(1..{k}) = {}", lcm_upto(k)?);
            println!("minwise lower bound max(n, lcm) = {}", lower_bound(n, k)?);
            println!("rankwise lower bound = {}", bargachev_bound(n, k)?);
            println!("minwise upper bound = {}", upper_bound(n, k)?);
            Ok(EXIT_OK)
        }
        Command::Bijection { op } => {
            match op {
                BijectionOp::Phi { perm } => println!("{}", phi(&parse_perm(&perm)?)),
                BijectionOp::PhiInverse { perm } => println!("{}", phi_inverse(&parse_perm(&perm)?)),
                BijectionOp::Counts { n } => {
                    let c = count_by_class(n)?;
                    println!("{:>3} {:>12} {:>12}", "k", "fixed", "waste");
                    for (j, (a, b)) in c.fixed_points.iter().zip(&c.waste).enumerate() {
                        println!("{j:>3} {a:>12} {b:>12}");
                    }
                }
            }
            Ok(EXIT_OK)
        }
        Command::Double { family, k, out } => {
            let doubled = read_family(&family)?.double(k)?;
            let report = verify_minwise(&doubled, (k + 1).min(doubled.n()))?;
            eprintln!("{report}");
            emit(&doubled.to_string(), out.as_deref())?;
            Ok(if report.holds { EXIT_OK } else { EXIT_NEGATIVE })
        }
        Command::Restrict { family, n, out } => {
            let restricted = read_family(&family)?.restrict(n)?;
            emit(&restricted.to_string(), out.as_deref())?;
            Ok(EXIT_OK)
        }
        Command::MinhashCheck { family, k, force } => {
            let f = read_family(&family)?;
            let report = verify_minwise(&f, k)?;
            if !report.holds && !force {
                return Err(Error::InvalidFamily(format!("{report}; pass --force to check anyway")));
            }
            let pairs = jaccard_pairs(&f, k)?;
            let mut failing = 0;
            for p in &pairs {
                let ok = p.passes();
                failing += usize::from(!ok);
                println!(
                    "{:?} {:?} P = {} J = {} {}",
                    p.a,
                    p.b,
                    p.probability,
                    p.jaccard,
                    if ok { "ok" } else { "FAIL" }
                );
            }
            println!("{} pairs, {failing} failing", pairs.len());
            Ok(if failing == 0 { EXIT_OK } else { EXIT_NEGATIVE })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Solver(_) => EXIT_SOLVER,
                _ => EXIT_USAGE,
            })
        }
    }
}
