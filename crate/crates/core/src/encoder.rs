//! CNF models for families of `d` permutations of `{1..n}` that are
//! k-restricted minwise (or k-rankwise) independent: the unrestricted
//! model, and the two coset heuristics over a fixed subgroup `G`.
//!
//! A member `π` is represented by its incidence variables
//! `x_{i,j} ↔ π(i) < π(j)`; only `i < j` gets a variable and `x_{j,i}` is
//! its negation. Left cosets reuse the offset variables under index
//! relabelling by `γ`. Right cosets model each offset `θ` as a permutation
//! matrix `T` and derive the incidence variables of `γ ∘ θ` by comparing
//! rows of `T` lexicographically after reordering columns by `γ⁻¹`.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bounds::{factorial, lcm_upto};
use crate::cnf::{CnfFormula, Lit};
use crate::error::{Error, Result};
use crate::family::{verify_minwise, verify_rankwise, Family, VerificationReport};
use crate::groups::{closure, Subgroup};
use crate::patterns::{enumerate_sop, enumerate_subperms};
use crate::perm::{z_cat_positions, IncidenceMatrix, Permutation, PermutationMatrix, MAX_N};

/// Comparisons needed to sort `n` items, `n = 1..=8`.
const SORTING_COMPARISONS: [usize; 8] = [0, 1, 3, 5, 7, 10, 13, 16];

/// Length of the symmetry-breaking prefix of each `z_cat` string.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum HSetting {
    /// Comparisons needed to sort `n` items; `⌈log2 n!⌉` beyond the table.
    #[default]
    Auto,
    Off,
    Full,
    Value(usize),
}

impl HSetting {
    pub fn resolve(self, n: usize) -> Result<usize> {
        let full = n * n.saturating_sub(1) / 2;
        Ok(match self {
            HSetting::Off => 0,
            HSetting::Full => full,
            HSetting::Value(h) if h <= full => h,
            HSetting::Value(h) => {
                return Err(Error::InvalidConfig(format!(
                    "H = {h} exceeds n(n-1)/2 = {full}"
                )))
            }
            HSetting::Auto if n == 0 => 0,
            HSetting::Auto if n <= SORTING_COMPARISONS.len() => SORTING_COMPARISONS[n - 1],
            HSetting::Auto => {
                let log2: f64 = (2..=n).map(|i| (i as f64).log2()).sum();
                (log2.ceil() as usize).min(full)
            }
        })
    }
}

impl FromStr for HSetting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "auto" => Ok(HSetting::Auto),
            "off" => Ok(HSetting::Off),
            "full" => Ok(HSetting::Full),
            t => t
                .parse()
                .map(HSetting::Value)
                .map_err(|_| Error::InvalidConfig(format!("H must be auto, off, full or an integer, got {t:?}"))),
        }
    }
}

impl fmt::Display for HSetting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HSetting::Auto => f.write_str("auto"),
            HSetting::Off => f.write_str("off"),
            HSetting::Full => f.write_str("full"),
            HSetting::Value(h) => write!(f, "{h}"),
        }
    }
}

/// How right-coset members are read off an offset's permutation matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RightSemantics {
    /// Columns reordered by `γ⁻¹`: members are `γ ∘ θ`.
    #[default]
    Columns,
    /// Rows permuted by `γ`: members are `θ ∘ γ`.
    Rows,
}

impl fmt::Display for RightSemantics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RightSemantics::Columns => "columns",
            RightSemantics::Rows => "rows",
        })
    }
}

impl FromStr for RightSemantics {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "columns" => Ok(RightSemantics::Columns),
            "rows" => Ok(RightSemantics::Rows),
            _ => Err(Error::InvalidConfig(format!("unknown right-coset semantics {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Mode {
    Pure,
    Left(Subgroup),
    Right(Subgroup),
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::Pure => "pure",
            Mode::Left(_) => "left",
            Mode::Right(_) => "right",
        }
    }

    pub fn group(&self) -> Option<&Subgroup> {
        match self {
            Mode::Pure => None,
            Mode::Left(g) | Mode::Right(g) => Some(g),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModelConfig {
    pub n: usize,
    pub k: usize,
    pub d: usize,
    pub mode: Mode,
    pub h: HSetting,
    /// `π_1 = id` (pure) or `θ_1 = id` (right). Ignored for left cosets.
    pub fix_first: bool,
    /// Encode k-rankwise instead of k-restricted minwise independence.
    pub rankwise: bool,
    pub right_semantics: RightSemantics,
}

impl ModelConfig {
    pub fn new(n: usize, k: usize, d: usize) -> Self {
        ModelConfig {
            n,
            k,
            d,
            mode: Mode::Pure,
            h: HSetting::Auto,
            fix_first: true,
            rankwise: false,
            right_semantics: RightSemantics::Columns,
        }
    }

    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_h(mut self, h: HSetting) -> Self {
        self.h = h;
        self
    }

    /// Checks ranges and divisibility; returns the resolved `H`.
    pub fn validate(&self) -> Result<usize> {
        let (n, k, d) = (self.n, self.k, self.d);
        if n == 0 || n > MAX_N {
            return Err(Error::OutOfRange(format!("n = {n} not in 1..={MAX_N}")));
        }
        if k == 0 || d == 0 {
            return Err(Error::OutOfRange("k and d must be positive".into()));
        }
        if self.rankwise {
            if k > n {
                return Err(Error::InvalidConfig(format!("rankwise k = {k} exceeds n = {n}")));
            }
            let kf = factorial(k)?;
            if d as u128 % kf != 0 {
                return Err(Error::InvalidConfig(format!("d = {d} is not a multiple of {k}! = {kf}")));
            }
        } else {
            let l = lcm_upto(k)?;
            if d as u128 % l != 0 {
                return Err(Error::InvalidConfig(format!(
                    "d = {d} is not a multiple of lcm(1..{k}) = {l}"
                )));
            }
        }
        if let Some(g) = self.mode.group() {
            if g.n() != n {
                return Err(Error::SizeMismatch {
                    expected: n,
                    found: g.n(),
                });
            }
            if d % g.order() != 0 {
                return Err(Error::InvalidConfig(format!(
                    "|G| = {} does not divide d = {d}",
                    g.order()
                )));
            }
        }
        self.h.resolve(n)
    }
}

fn mode_name(map: &DecodeMap) -> &'static str {
    match map.mode {
        MapMode::Pure => "pure",
        MapMode::Left => "left",
        MapMode::Right => "right",
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum MapMode {
    Pure,
    Left,
    Right,
}

/// Everything needed to turn a model back into a family: the variable of
/// every incidence and permutation-matrix entry plus the configuration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecodeMap {
    mode: MapMode,
    n: usize,
    k: usize,
    d: usize,
    h: usize,
    rankwise: bool,
    fix_first: bool,
    right_semantics: RightSemantics,
    group: Subgroup,
    /// Per member (pure), offset (left) or offset/group element pair
    /// (right, index `ℓ·q + m`): variables of `x_{i,j}`, `i < j`, row-major.
    x: Vec<Vec<u32>>,
    /// Per offset (right only): `t_{i,c}` variables, row-major.
    t: Vec<Vec<u32>>,
}

/// Row-major index of `(i, j)`, `i < j`, among the upper-triangle pairs.
fn pair_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * n - i * (i + 1) / 2 + (j - i - 1)
}

/// Literal for `π(a) < π(b)` given the upper-triangle variables of `π`.
fn x_lit(vars: &[u32], n: usize, a: usize, b: usize) -> Lit {
    debug_assert_ne!(a, b);
    if a < b {
        Lit::pos(vars[pair_index(n, a, b)])
    } else {
        !Lit::pos(vars[pair_index(n, b, a)])
    }
}

impl DecodeMap {
    pub fn mode(&self) -> &'static str {
        mode_name(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn h(&self) -> usize {
        self.h
    }

    pub fn rankwise(&self) -> bool {
        self.rankwise
    }

    pub fn group(&self) -> &Subgroup {
        &self.group
    }

    /// Variables of the incidence entries, `x <member> <i> <j> <var>`.
    pub fn x_entries(&self) -> impl Iterator<Item = (usize, usize, usize, u32)> + '_ {
        let n = self.n;
        self.x.iter().enumerate().flat_map(move |(m, vars)| {
            (0..n).flat_map(move |i| (i + 1..n).map(move |j| (m + 1, i + 1, j + 1, vars[pair_index(n, i, j)])))
        })
    }

    /// Variables of the permutation-matrix entries, `t <offset> <i> <c> <var>`.
    pub fn t_entries(&self) -> impl Iterator<Item = (usize, usize, usize, u32)> + '_ {
        let n = self.n;
        self.t.iter().enumerate().flat_map(move |(o, vars)| {
            (0..n).flat_map(move |i| (0..n).map(move |c| (o + 1, i + 1, c + 1, vars[i * n + c])))
        })
    }

    /// Text sidecar: header lines, then one line per decision variable.
    pub fn write_to<W: Write>(&self, sink: &mut W) -> io::Result<()> {
        let mut out = io::BufWriter::new(sink);
        writeln!(out, "mode {}", self.mode())?;
        writeln!(out, "n {}", self.n)?;
        writeln!(out, "k {}", self.k)?;
        writeln!(out, "d {}", self.d)?;
        writeln!(out, "h {}", self.h)?;
        writeln!(out, "rankwise {}", self.rankwise)?;
        writeln!(out, "fix-first {}", self.fix_first)?;
        writeln!(out, "right-semantics {}", self.right_semantics)?;
        writeln!(out, "group-order {}", self.group.order())?;
        writeln!(out, "generators {}", self.group.generator_line())?;
        for (m, i, j, v) in self.x_entries() {
            writeln!(out, "x {m} {i} {j} {v}")?;
        }
        for (o, i, c, v) in self.t_entries() {
            writeln!(out, "t {o} {i} {c} {v}")?;
        }
        out.flush()
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("sidecar is ASCII")
    }
}

impl FromStr for DecodeMap {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut header = std::collections::HashMap::new();
        let mut xs: Vec<(usize, usize, usize, u32)> = Vec::new();
        let mut ts: Vec<(usize, usize, usize, u32)> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |msg: String| Error::Parse { line: idx + 1, msg };
            let (key, rest) = line.split_once(' ').ok_or_else(|| err(format!("malformed line {line:?}")))?;
            match key {
                "x" | "t" => {
                    let nums: Vec<usize> = rest
                        .split_whitespace()
                        .map(|t| t.parse().map_err(|_| err(format!("bad number {t:?}"))))
                        .collect::<Result<_>>()?;
                    if nums.len() != 4 || nums[..3].contains(&0) || nums[3] == 0 || nums[3] > i32::MAX as usize {
                        return Err(err(format!("malformed entry {line:?}")));
                    }
                    let e = (nums[0], nums[1], nums[2], nums[3] as u32);
                    if key == "x" { xs.push(e) } else { ts.push(e) }
                }
                _ => {
                    if header.insert(key.to_string(), rest.trim().to_string()).is_some() {
                        return Err(err(format!("duplicate header {key:?}")));
                    }
                }
            }
        }
        let get = |key: &str| {
            header.get(key).ok_or_else(|| Error::Parse {
                line: 0,
                msg: format!("missing header {key:?}"),
            })
        };
        let num = |key: &str| -> Result<usize> {
            get(key)?.parse().map_err(|_| Error::Parse {
                line: 0,
                msg: format!("header {key:?} is not a number"),
            })
        };
        let flag = |key: &str| -> Result<bool> {
            get(key)?.parse().map_err(|_| Error::Parse {
                line: 0,
                msg: format!("header {key:?} is not a boolean"),
            })
        };
        let mode = match get("mode")?.as_str() {
            "pure" => MapMode::Pure,
            "left" => MapMode::Left,
            "right" => MapMode::Right,
            other => return Err(Error::InvalidConfig(format!("unknown mode {other:?}"))),
        };
        let n = num("n")?;
        if n == 0 || n > MAX_N {
            return Err(Error::OutOfRange(format!("n = {n}")));
        }
        let gens = get("generators")?
            .split(';')
            .map(|g| g.parse::<Permutation>())
            .collect::<Result<Vec<_>>>()?;
        let group = closure(n, &gens)?;
        if group.order() != num("group-order")? {
            return Err(Error::InvalidConfig("generators do not match the group order".into()));
        }
        let pairs = n * (n - 1) / 2;
        let collect = |entries: &[(usize, usize, usize, u32)], width: usize, is_x: bool| -> Result<Vec<Vec<u32>>> {
            let count = entries.iter().map(|e| e.0).max().unwrap_or(0);
            let mut out = vec![vec![0u32; width]; count];
            for &(m, i, j, v) in entries {
                let slot = if is_x {
                    if !(i < j && j <= n) {
                        return Err(Error::InvalidConfig(format!("bad x entry ({m}, {i}, {j})")));
                    }
                    pair_index(n, i - 1, j - 1)
                } else {
                    if i > n || j > n {
                        return Err(Error::InvalidConfig(format!("bad t entry ({m}, {i}, {j})")));
                    }
                    (i - 1) * n + (j - 1)
                };
                if out[m - 1][slot] != 0 {
                    return Err(Error::InvalidConfig(format!("entry ({m}, {i}, {j}) given twice")));
                }
                out[m - 1][slot] = v;
            }
            if out.iter().flatten().any(|&v| v == 0) {
                return Err(Error::InvalidConfig("decode map is not total".into()));
            }
            Ok(out)
        };
        let map = DecodeMap {
            mode,
            n,
            k: num("k")?,
            d: num("d")?,
            h: num("h")?,
            rankwise: flag("rankwise")?,
            fix_first: flag("fix-first")?,
            right_semantics: get("right-semantics")?.parse()?,
            group,
            x: collect(&xs, pairs, true)?,
            t: collect(&ts, n * n, false)?,
        };
        let q = map.group.order();
        let expected_x = match mode {
            MapMode::Pure | MapMode::Right => map.d,
            MapMode::Left => map.d / q,
        };
        let expected_t = if mode == MapMode::Right { map.d / q } else { 0 };
        if map.d % q != 0 || map.x.len() != expected_x || map.t.len() != expected_t {
            return Err(Error::InvalidConfig("decode map entry counts do not match d and |G|".into()));
        }
        Ok(map)
    }
}

/// Builds the model selected by `cfg.mode`.
pub fn build(cfg: &ModelConfig) -> Result<(CnfFormula, DecodeMap)> {
    match &cfg.mode {
        Mode::Pure => build_pure(cfg),
        Mode::Left(g) => build_left(cfg, g),
        Mode::Right(g) => build_right(cfg, g),
    }
}

pub fn build_pure(cfg: &ModelConfig) -> Result<(CnfFormula, DecodeMap)> {
    let cfg = ModelConfig {
        mode: Mode::Pure,
        ..cfg.clone()
    };
    build_incidence_model(&cfg, &Subgroup::trivial(cfg.n))
}

pub fn build_left(cfg: &ModelConfig, group: &Subgroup) -> Result<(CnfFormula, DecodeMap)> {
    let cfg = ModelConfig {
        mode: Mode::Left(group.clone()),
        ..cfg.clone()
    };
    build_incidence_model(&cfg, group)
}

/// Adds both 3-cycle exclusions for every triple `a < b < c`.
fn add_transitivity(f: &mut CnfFormula, vars: &[u32], n: usize) {
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                let ab = x_lit(vars, n, a, b);
                let bc = x_lit(vars, n, b, c);
                let ac = x_lit(vars, n, a, c);
                f.add_clause(&[!ab, !bc, ac]);
                f.add_clause(&[ab, bc, !ac]);
            }
        }
    }
}

/// For member incidence accessors `members[p](a, b)`, adds the counting
/// constraints of the configured independence property.
fn add_cardinality<F>(f: &mut CnfFormula, cfg: &ModelConfig, members: usize, lit: F) -> Result<()>
where
    F: Fn(usize, usize, usize) -> Lit,
{
    let (n, k, d) = (cfg.n, cfg.k, cfg.d);
    let constrain = |f: &mut CnfFormula, chains: &[Vec<(usize, usize)>], bound: usize| -> Result<()> {
        let terms = (0..members)
            .map(|p| {
                let lits: Vec<Lit> = chains.iter().flatten().map(|&(a, b)| lit(p, a, b)).collect();
                f.define_conjunction(&lits)
            })
            .collect::<Result<Vec<_>>>()?;
        f.at_most(&terms, bound);
        Ok(())
    };
    // Pattern `s` (1-based): `s_1` precedes every `s_h`.
    let star = |entries: &[usize]| -> Vec<(usize, usize)> {
        entries[1..].iter().map(|&s| (entries[0] - 1, s - 1)).collect()
    };
    // Subpermutation `σ`: `σ(1) < σ(2) < …` in the member's order.
    let chain = |entries: &[usize]| -> Vec<(usize, usize)> {
        entries.windows(2).map(|w| (w[0] - 1, w[1] - 1)).collect()
    };
    if cfg.rankwise {
        if k >= 2 {
            let bound = d / factorial(k)? as usize;
            for sigma in enumerate_subperms(n, k)? {
                constrain(f, &[chain(sigma.entries())], bound)?;
            }
        }
        return Ok(());
    }
    if k >= 3 && n >= 3 {
        for j in 4..=k.min(n) {
            for s in enumerate_sop(n, j)? {
                constrain(f, &[star(s.entries())], d / j)?;
            }
        }
        for sigma in enumerate_subperms(n, 3)? {
            constrain(f, &[chain(sigma.entries())], d / 6)?;
        }
    } else if k >= 2 && n >= 2 {
        for s in enumerate_sop(n, 2)? {
            constrain(f, &[star(s.entries())], d / 2)?;
        }
    }
    Ok(())
}

/// Non-increasing chain of `z_cat` prefixes over consecutive members.
fn add_lex_chain(f: &mut CnfFormula, members: &[Vec<u32>], n: usize, h: usize) -> Result<()> {
    let positions = &z_cat_positions(n)[..h];
    let z = |vars: &[u32]| -> Vec<Lit> { positions.iter().map(|&(i, j)| x_lit(vars, n, i, j)).collect() };
    for w in members.windows(2) {
        f.lex_leq(&z(&w[1]), &z(&w[0]))?;
    }
    Ok(())
}

fn build_incidence_model(cfg: &ModelConfig, group: &Subgroup) -> Result<(CnfFormula, DecodeMap)> {
    let h = cfg.validate()?;
    let n = cfg.n;
    let q = group.order();
    let offsets = cfg.d / q;
    let pure = matches!(cfg.mode, Mode::Pure);
    let mut f = CnfFormula::new();
    let pairs = n * (n - 1) / 2;
    let x: Vec<Vec<u32>> = (0..offsets)
        .map(|_| (0..pairs).map(|_| f.new_var().var().expect("fresh variable")).collect())
        .collect();
    for vars in &x {
        add_transitivity(&mut f, vars, n);
    }
    if pure && cfg.fix_first && !x.is_empty() {
        for &v in &x[0] {
            f.add_clause(&[Lit::pos(v)]);
        }
    }
    // Member `θ_ℓ ∘ γ_m` has `π(a) < π(b)` iff `θ_ℓ(γ_m(a)) < θ_ℓ(γ_m(b))`.
    let gammas: Vec<Vec<usize>> = group
        .elements()
        .iter()
        .map(|g| (1..=n).map(|i| g.apply(i) - 1).collect())
        .collect();
    add_cardinality(&mut f, cfg, offsets * q, |p, a, b| {
        let (l, m) = (p / q, p % q);
        x_lit(&x[l], n, gammas[m][a], gammas[m][b])
    })?;
    add_lex_chain(&mut f, &x, n, h)?;
    let map = DecodeMap {
        mode: if pure { MapMode::Pure } else { MapMode::Left },
        n,
        k: cfg.k,
        d: cfg.d,
        h,
        rankwise: cfg.rankwise,
        fix_first: pure && cfg.fix_first,
        right_semantics: cfg.right_semantics,
        group: group.clone(),
        x,
        t: Vec::new(),
    };
    Ok((f, map))
}

pub fn build_right(cfg: &ModelConfig, group: &Subgroup) -> Result<(CnfFormula, DecodeMap)> {
    let cfg = ModelConfig {
        mode: Mode::Right(group.clone()),
        ..cfg.clone()
    };
    let h = cfg.validate()?;
    let n = cfg.n;
    let q = group.order();
    let offsets = cfg.d / q;
    let mut f = CnfFormula::new();
    let fresh = |f: &mut CnfFormula| f.new_var().var().expect("fresh variable");
    let t: Vec<Vec<u32>> = (0..offsets).map(|_| (0..n * n).map(|_| fresh(&mut f)).collect()).collect();
    let tl = |o: usize, i: usize, c: usize| Lit::pos(t[o][i * n + c]);
    for o in 0..offsets {
        for i in 0..n {
            let row: Vec<Lit> = (0..n).map(|c| tl(o, i, c)).collect();
            f.add_clause(&row);
            for c in 0..n {
                for c2 in c + 1..n {
                    f.add_clause(&[!tl(o, i, c), !tl(o, i, c2)]);
                }
            }
        }
        for c in 0..n {
            for i in 0..n {
                for i2 in i + 1..n {
                    f.add_clause(&[!tl(o, i, c), !tl(o, i2, c)]);
                }
            }
        }
    }
    if cfg.fix_first && offsets > 0 {
        for i in 0..n {
            f.add_clause(&[tl(0, i, i)]);
        }
    }
    let pairs = n * (n - 1) / 2;
    let x: Vec<Vec<u32>> = (0..offsets * q)
        .map(|_| (0..pairs).map(|_| fresh(&mut f)).collect())
        .collect();
    let gammas: Vec<&Permutation> = group.elements().iter().collect();
    let inverses: Vec<Permutation> = gammas.iter().map(|g| g.inverse()).collect();
    for o in 0..offsets {
        for m in 0..q {
            // Row `i` of the member's permutation matrix, as `t` literals.
            let row = |i: usize| -> Vec<Lit> {
                match cfg.right_semantics {
                    RightSemantics::Columns => (0..n).map(|j| tl(o, i, inverses[m].apply(j + 1) - 1)).collect(),
                    RightSemantics::Rows => (0..n).map(|j| tl(o, gammas[m].apply(i + 1) - 1, j)).collect(),
                }
            };
            for i in 0..n {
                for r in i + 1..n {
                    let xv = Lit::pos(x[o * q + m][pair_index(n, i, r)]);
                    let (ri, rr) = (row(i), row(r));
                    // x → row r ⪯ row i, and ¬x → row i ⪯ row r.
                    let mut a = vec![xv];
                    a.extend(&rr);
                    let mut b = vec![Lit::TRUE];
                    b.extend(&ri);
                    f.lex_leq(&a, &b)?;
                    let mut a = vec![Lit::FALSE];
                    a.extend(rr.iter().map(|&l| !l));
                    let mut b = vec![xv];
                    b.extend(ri.iter().map(|&l| !l));
                    f.lex_leq(&a, &b)?;
                }
            }
        }
    }
    add_cardinality(&mut f, &cfg, offsets * q, |p, a, b| x_lit(&x[p], n, a, b))?;
    // Chain over the `γ_1 = id` members, i.e. the offsets themselves.
    let heads: Vec<Vec<u32>> = (0..offsets).map(|o| x[o * q].clone()).collect();
    add_lex_chain(&mut f, &heads, n, h)?;
    let map = DecodeMap {
        mode: MapMode::Right,
        n,
        k: cfg.k,
        d: cfg.d,
        h,
        rankwise: cfg.rankwise,
        fix_first: cfg.fix_first,
        right_semantics: cfg.right_semantics,
        group: group.clone(),
        x,
        t,
    };
    Ok((f, map))
}

fn read_incidence(model: &[bool], vars: &[u32], n: usize) -> Result<Permutation> {
    let value = |v: u32| model.get(v as usize).copied().unwrap_or(false);
    let rows: Vec<Vec<bool>> = (0..n)
        .map(|i| (0..n).map(|j| i != j && x_lit(vars, n, i, j).eval_with(value)).collect())
        .collect();
    IncidenceMatrix::from_rows(&rows)
        .and_then(|m| m.to_permutation())
        .map_err(|e| Error::Decode(e.to_string()))
}

/// Reads the family off a satisfying assignment (indexed by variable id).
pub fn decode(model: &[bool], map: &DecodeMap) -> Result<Family> {
    let n = map.n;
    let gammas = map.group.elements();
    let members = match map.mode {
        MapMode::Pure => map
            .x
            .iter()
            .map(|vars| read_incidence(model, vars, n))
            .collect::<Result<Vec<_>>>()?,
        MapMode::Left => {
            let thetas = map
                .x
                .iter()
                .map(|vars| read_incidence(model, vars, n))
                .collect::<Result<Vec<_>>>()?;
            thetas
                .iter()
                .flat_map(|th| gammas.iter().map(move |g| th.compose_unchecked(g)))
                .collect()
        }
        MapMode::Right => {
            let q = gammas.len();
            let value = |v: u32| model.get(v as usize).copied().unwrap_or(false);
            let mut out = Vec::with_capacity(map.d);
            for (o, tv) in map.t.iter().enumerate() {
                let rows: Vec<Vec<bool>> = (0..n).map(|i| (0..n).map(|c| value(tv[i * n + c])).collect()).collect();
                let theta = PermutationMatrix::from_rows(&rows)
                    .and_then(|m| m.to_permutation())
                    .map_err(|e| Error::Decode(format!("offset {}: {e}", o + 1)))?;
                for (m, g) in gammas.iter().enumerate() {
                    let member = match map.right_semantics {
                        RightSemantics::Columns => g.compose_unchecked(&theta),
                        RightSemantics::Rows => theta.compose_unchecked(g),
                    };
                    let derived = read_incidence(model, &map.x[o * q + m], n)?;
                    if derived != member {
                        return Err(Error::Decode(format!(
                            "offset {} element {}: incidence variables give {derived}, matrix gives {member}",
                            o + 1,
                            m + 1
                        )));
                    }
                    out.push(member);
                }
            }
            out
        }
    };
    Family::new(members).map_err(|e| Error::Decode(e.to_string()))
}

/// Runs the property check the model was built for.
pub fn verify_decoded(family: &Family, map: &DecodeMap) -> Result<VerificationReport> {
    if map.rankwise {
        verify_rankwise(family, map.k)
    } else {
        verify_minwise(family, map.k)
    }
}

/// One-line summary of a built formula.
pub fn describe(f: &CnfFormula, map: &DecodeMap) -> String {
    format!(
        "mode={} n={} k={} d={} |G|={} H={} vars={} clauses={}",
        map.mode(),
        map.n,
        map.k,
        map.d,
        map.group.order(),
        map.h,
        f.var_count(),
        f.num_clauses()
    )
}
