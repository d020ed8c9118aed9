//! Families of permutations: verification, constructions and the family
//! text format.
//!
//! A family is an ordered multiset `(π_1, …, π_d)` drawn uniformly. All
//! counts are exact integers and probabilities exact rationals.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;

use crate::bounds::{factorial, lcm_upto};
use crate::error::{Error, Result};
use crate::patterns::{enumerate_sop, enumerate_subperms};
use crate::perm::Permutation;

#[derive(Clone, PartialEq, Eq)]
pub struct Family {
    n: usize,
    members: Vec<Permutation>,
}

impl Family {
    pub fn new(members: Vec<Permutation>) -> Result<Self> {
        let Some(first) = members.first() else {
            return Err(Error::InvalidFamily("a family needs at least one member".into()));
        };
        let n = first.n();
        if let Some(bad) = members.iter().find(|p| p.n() != n) {
            return Err(Error::SizeMismatch {
                expected: n,
                found: bad.n(),
            });
        }
        Ok(Family { n, members })
    }

    /// Convenience constructor from 1-based one-line notations.
    pub fn from_one_line(rows: &[&[usize]]) -> Result<Self> {
        Family::new(
            rows.iter()
                .map(|r| Permutation::new(r))
                .collect::<Result<Vec<_>>>()?,
        )
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.members.len()
    }

    pub fn members(&self) -> &[Permutation] {
        &self.members
    }

    pub fn into_members(self) -> Vec<Permutation> {
        self.members
    }

    /// Order-insensitive multiset equality.
    pub fn same_multiset(&self, other: &Family) -> bool {
        let mut a = self.members.clone();
        let mut b = other.members.clone();
        a.sort();
        b.sort();
        a == b
    }

    /// Every member composed on the right with `rho`: `(π_i ∘ ρ)_i`.
    pub fn compose_right(&self, rho: &Permutation) -> Result<Family> {
        Family::new(
            self.members
                .iter()
                .map(|p| p.compose(rho))
                .collect::<Result<Vec<_>>>()?,
        )
    }

    /// Appends `σ ∘ θ` for every member `θ`, where `σ` is the order
    /// reversal. For a k-restricted minwise independent family with odd
    /// `k ≥ 3` the result is (k+1)-restricted minwise independent.
    pub fn double(&self, k: usize) -> Result<Family> {
        if k < 3 || k % 2 == 0 {
            return Err(Error::OutOfRange(format!(
                "doubling needs an odd level k >= 3, got {k}"
            )));
        }
        let sigma = Permutation::reversal(self.n);
        let mut members = self.members.clone();
        members.extend(self.members.iter().map(|p| sigma.compose_unchecked(p)));
        Family::new(members)
    }

    /// Restricts every member to the symbols `1..=new_n`: the remaining
    /// images are rank-compressed, so relative orders on `1..=new_n` are kept.
    pub fn restrict(&self, new_n: usize) -> Result<Family> {
        if new_n == 0 || new_n > self.n {
            return Err(Error::OutOfRange(format!(
                "restriction target {new_n} not in 1..={}",
                self.n
            )));
        }
        let members = self
            .members
            .iter()
            .map(|p| {
                let kept: Vec<usize> = (0..new_n).map(|i| p.at(i)).collect();
                let ranks: Vec<usize> = kept
                    .iter()
                    .map(|&v| 1 + kept.iter().filter(|&&w| w < v).count())
                    .collect();
                Permutation::new(&ranks)
            })
            .collect::<Result<Vec<_>>>()?;
        Family::new(members)
    }

    /// Composes every member with `π_1^{-1}` on the right, then sorts by
    /// non-increasing z_cat string. The first member becomes the identity.
    pub fn normalize(&self) -> Family {
        let rho = self.members[0].inverse();
        let mut keyed: Vec<(Vec<bool>, Permutation)> = self
            .members
            .iter()
            .map(|p| {
                let q = p.compose_unchecked(&rho);
                (q.z_cat(), q)
            })
            .collect();
        keyed.sort_by(|a, b| b.0.cmp(&a.0));
        Family {
            n: self.n,
            members: keyed.into_iter().map(|(_, q)| q).collect(),
        }
    }

    /// Fraction of members under which `min π(A) = min π(B)`.
    pub fn min_collision_prob(&self, a: &[usize], b: &[usize]) -> Result<Ratio<u64>> {
        for (name, set) in [("A", a), ("B", b)] {
            if set.is_empty() {
                return Err(Error::OutOfRange(format!("set {name} is empty")));
            }
            if let Some(&v) = set.iter().find(|&&v| v == 0 || v > self.n) {
                return Err(Error::OutOfRange(format!(
                    "set {name} holds {v}, outside 1..={}",
                    self.n
                )));
            }
        }
        let min_of = |p: &Permutation, s: &[usize]| s.iter().map(|&v| p.at(v - 1)).min();
        let hits = self
            .members
            .iter()
            .filter(|p| min_of(p, a) == min_of(p, b))
            .count();
        Ok(Ratio::new(hits as u64, self.d() as u64))
    }

    pub fn verify_minwise(&self, k: usize) -> Result<VerificationReport> {
        verify_minwise(self, k)
    }

    pub fn verify_rankwise(&self, k: usize) -> Result<VerificationReport> {
        verify_rankwise(self, k)
    }
}

impl fmt::Debug for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.members).finish()
    }
}

/// Text format: a header `n d`, then `d` lines of one-line notation. Lines
/// starting with `#` are comments.
impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} {}", self.n, self.d())?;
        for p in &self.members {
            writeln!(f, "{p}")?;
        }
        Ok(())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut lines = s
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (hline, header) = lines.next().ok_or(Error::Parse {
            line: 0,
            msg: "missing `n d` header".into(),
        })?;
        let nums: Vec<usize> = header
            .split_whitespace()
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::Parse {
                line: hline,
                msg: format!("bad header {header:?}"),
            })?;
        let [n, d] = nums[..] else {
            return Err(Error::Parse {
                line: hline,
                msg: "header must be `n d`".into(),
            });
        };
        let mut members = Vec::with_capacity(d);
        for (line, text) in lines {
            let p: Permutation = text.parse().map_err(|e: Error| Error::Parse {
                line,
                msg: e.to_string(),
            })?;
            if p.n() != n {
                return Err(Error::Parse {
                    line,
                    msg: format!("expected {n} entries, found {}", p.n()),
                });
            }
            members.push(p);
        }
        if members.len() != d {
            return Err(Error::Parse {
                line: hline,
                msg: format!("header announces {d} members, found {}", members.len()),
            });
        }
        Family::new(members)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Property {
    Minwise(usize),
    Rankwise(usize),
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Property::Minwise(k) => write!(f, "{k}-restricted minwise independence"),
            Property::Rankwise(k) => write!(f, "{k}-rankwise independence"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Witness {
    /// `d` is not a multiple of the required modulus.
    Divisibility { d: usize, modulus: u128 },
    /// A semiordered pattern whose head is the minimum too often or too rarely.
    Pattern {
        entries: Vec<usize>,
        observed: usize,
        required: usize,
    },
    /// A subpermutation realized by the wrong number of members.
    Subpermutation {
        entries: Vec<usize>,
        observed: usize,
        required: usize,
    },
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Witness::Divisibility { d, modulus } => {
                write!(f, "d = {d} is not a multiple of {modulus}")
            }
            Witness::Pattern {
                entries,
                observed,
                required,
            } => write!(
                f,
                "pattern {entries:?}: head is minimal in {observed} members, need {required}"
            ),
            Witness::Subpermutation {
                entries,
                observed,
                required,
            } => write!(
                f,
                "subpermutation {entries:?}: realized by {observed} members, need {required}"
            ),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerificationReport {
    pub property: Property,
    pub holds: bool,
    /// First failure in enumeration order; present iff `holds` is false.
    pub witness: Option<Witness>,
}

impl VerificationReport {
    fn pass(property: Property) -> Self {
        VerificationReport {
            property,
            holds: true,
            witness: None,
        }
    }

    fn fail(property: Property, witness: Witness) -> Self {
        VerificationReport {
            property,
            holds: false,
            witness: Some(witness),
        }
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.witness {
            None => write!(f, "{}: holds", self.property),
            Some(w) => write!(f, "{}: fails ({w})", self.property),
        }
    }
}

fn check_level(f: &Family, k: usize) -> Result<()> {
    if k == 0 || k > f.n() {
        return Err(Error::OutOfRange(format!(
            "level k = {k} not in 1..={}",
            f.n()
        )));
    }
    Ok(())
}

/// Checks that for every `j ≤ k` and every `s ∈ SOP(n, j)` exactly `d/j`
/// members map `s_1` below all of `s_2..s_j`.
pub fn verify_minwise(f: &Family, k: usize) -> Result<VerificationReport> {
    check_level(f, k)?;
    let property = Property::Minwise(k);
    let d = f.d();
    let modulus = lcm_upto(k)?;
    if d as u128 % modulus != 0 {
        return Ok(VerificationReport::fail(
            property,
            Witness::Divisibility { d, modulus },
        ));
    }
    for j in 1..=k {
        let required = d / j;
        for pattern in enumerate_sop(f.n(), j)? {
            let head = pattern.head() - 1;
            let observed = f
                .members()
                .iter()
                .filter(|p| {
                    let v = p.at(head);
                    pattern.tail().iter().all(|&t| v < p.at(t - 1))
                })
                .count();
            if observed != required {
                return Ok(VerificationReport::fail(
                    property,
                    Witness::Pattern {
                        entries: pattern.entries().to_vec(),
                        observed,
                        required,
                    },
                ));
            }
        }
    }
    Ok(VerificationReport::pass(property))
}

/// Checks that every `σ ∈ Inj(n, k)` is realized, `π(σ(1)) < … < π(σ(k))`,
/// by exactly `d/k!` members.
pub fn verify_rankwise(f: &Family, k: usize) -> Result<VerificationReport> {
    check_level(f, k)?;
    let property = Property::Rankwise(k);
    let d = f.d();
    let modulus = factorial(k)?;
    if d as u128 % modulus != 0 {
        return Ok(VerificationReport::fail(
            property,
            Witness::Divisibility { d, modulus },
        ));
    }
    let required = d / modulus as usize;
    for sigma in enumerate_subperms(f.n(), k)? {
        let e = sigma.entries();
        let observed = f
            .members()
            .iter()
            .filter(|p| e.windows(2).all(|w| p.at(w[0] - 1) < p.at(w[1] - 1)))
            .count();
        if observed != required {
            return Ok(VerificationReport::fail(
                property,
                Witness::Subpermutation {
                    entries: e.to_vec(),
                    observed,
                    required,
                },
            ));
        }
    }
    Ok(VerificationReport::pass(property))
}

/// Collision probability of one pair of sets next to its Jaccard index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairCheck {
    pub a: Vec<usize>,
    pub b: Vec<usize>,
    pub probability: Ratio<u64>,
    pub jaccard: Ratio<u64>,
}

impl PairCheck {
    pub fn passes(&self) -> bool {
        self.probability == self.jaccard
    }
}

/// Every ordered pair of non-empty `A, B ⊆ {1..n}` with `|A ∪ B| ≤ k`,
/// unions in lexicographic order, each union split over
/// (A only, B only, both) in base-3 order.
pub fn jaccard_pairs(f: &Family, k: usize) -> Result<Vec<PairCheck>> {
    let mut out = Vec::new();
    for size in 1..=k.min(f.n()) {
        for union in crate::patterns::combinations(f.n(), size) {
            for code in 0..3usize.pow(size as u32) {
                let (mut a, mut b) = (Vec::new(), Vec::new());
                let mut c = code;
                for &v in &union {
                    match c % 3 {
                        0 => a.push(v),
                        1 => b.push(v),
                        _ => {
                            a.push(v);
                            b.push(v);
                        }
                    }
                    c /= 3;
                }
                if a.is_empty() || b.is_empty() {
                    continue;
                }
                let both = a.iter().filter(|v| b.contains(v)).count();
                out.push(PairCheck {
                    probability: f.min_collision_prob(&a, &b)?,
                    jaccard: Ratio::new(both as u64, size as u64),
                    a,
                    b,
                });
            }
        }
    }
    Ok(out)
}
