//! Permutations of `{1..n}` and the boolean matrices derived from them.
//!
//! Every public interface is 1-based (one-line notation `(π(1), …, π(n))`);
//! the internal image vector is 0-based and packed into `u8`, which caps the
//! ground set at [`MAX_N`] symbols.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Largest supported ground-set size.
pub const MAX_N: usize = 255;

/// A bijection on `{1..n}`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    image: Vec<u8>,
}

impl Permutation {
    /// Builds a permutation from its 1-based one-line notation.
    pub fn new(one_line: &[usize]) -> Result<Self> {
        let n = one_line.len();
        if n == 0 || n > MAX_N {
            return Err(Error::InvalidPermutation(format!(
                "length {n} outside 1..={MAX_N}"
            )));
        }
        let mut seen = vec![false; n];
        let mut image = Vec::with_capacity(n);
        for &v in one_line {
            if v == 0 || v > n || seen[v - 1] {
                return Err(Error::InvalidPermutation(format!(
                    "{one_line:?} is not a rearrangement of 1..{n}"
                )));
            }
            seen[v - 1] = true;
            image.push((v - 1) as u8);
        }
        Ok(Permutation { image })
    }

    /// Wraps a 0-based image vector that is already known to be a bijection.
    pub(crate) fn from_zero_based_unchecked(image: Vec<u8>) -> Self {
        debug_assert!({
            let mut s = image.clone();
            s.sort_unstable();
            s.iter().enumerate().all(|(i, &v)| v as usize == i)
        });
        Permutation { image }
    }

    pub fn identity(n: usize) -> Self {
        assert!((1..=MAX_N).contains(&n), "n = {n} out of range");
        Permutation {
            image: (0..n as u8).collect(),
        }
    }

    /// The order-reversing permutation `i ↦ n + 1 − i`.
    pub fn reversal(n: usize) -> Self {
        assert!((1..=MAX_N).contains(&n), "n = {n} out of range");
        Permutation {
            image: (0..n as u8).rev().collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.image.len()
    }

    /// `π(i)` for 1-based `i`.
    pub fn apply(&self, i: usize) -> usize {
        self.image[i - 1] as usize + 1
    }

    /// 0-based image access.
    #[inline]
    pub(crate) fn at(&self, i: usize) -> usize {
        self.image[i] as usize
    }

    /// 1-based one-line notation.
    pub fn one_line(&self) -> Vec<usize> {
        self.image.iter().map(|&v| v as usize + 1).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.image.iter().enumerate().all(|(i, &v)| v as usize == i)
    }

    /// `self ∘ other`, i.e. `i ↦ self(other(i))`.
    pub fn compose(&self, other: &Permutation) -> Result<Permutation> {
        if self.n() != other.n() {
            return Err(Error::SizeMismatch {
                expected: self.n(),
                found: other.n(),
            });
        }
        Ok(self.compose_unchecked(other))
    }

    #[inline]
    pub(crate) fn compose_unchecked(&self, other: &Permutation) -> Permutation {
        Permutation {
            image: other.image.iter().map(|&j| self.image[j as usize]).collect(),
        }
    }

    pub fn inverse(&self) -> Permutation {
        let mut image = vec![0u8; self.n()];
        for (i, &v) in self.image.iter().enumerate() {
            image[v as usize] = i as u8;
        }
        Permutation { image }
    }

    /// Sorted 1-based fixed points.
    pub fn fixed_points(&self) -> Vec<usize> {
        self.image
            .iter()
            .enumerate()
            .filter(|&(i, &v)| v as usize == i)
            .map(|(i, _)| i + 1)
            .collect()
    }

    pub fn incidence(&self) -> IncidenceMatrix {
        let n = self.n();
        let mut bits = vec![false; n * n];
        for i in 0..n {
            for j in 0..n {
                bits[i * n + j] = self.image[i] < self.image[j];
            }
        }
        IncidenceMatrix { n, bits }
    }

    pub fn perm_matrix(&self) -> PermutationMatrix {
        let n = self.n();
        let mut bits = vec![false; n * n];
        for (i, &v) in self.image.iter().enumerate() {
            bits[i * n + v as usize] = true;
        }
        PermutationMatrix { n, bits }
    }

    /// Concatenated upper side-diagonals of the incidence matrix.
    pub fn z_cat(&self) -> Vec<bool> {
        z_cat_positions(self.n())
            .into_iter()
            .map(|(i, j)| self.image[i] < self.image[j])
            .collect()
    }

    /// Canonical cycle notation: each cycle starts with its smallest entry
    /// and cycles appear with strictly decreasing leaders.
    pub fn cycle_form(&self) -> CycleForm {
        let n = self.n();
        let mut seen = vec![false; n];
        let mut cycles = Vec::new();
        // Scanning leaders in increasing order yields min-first cycles.
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut cycle = Vec::new();
            let mut cur = start;
            while !seen[cur] {
                seen[cur] = true;
                cycle.push(cur + 1);
                cur = self.image[cur] as usize;
            }
            cycles.push(cycle);
        }
        cycles.reverse();
        CycleForm { cycles }
    }

    /// Lexicographic successor in one-line notation, or `None` for the last
    /// permutation.
    pub fn next_lex(&self) -> Option<Permutation> {
        let mut image = self.image.clone();
        next_permutation(&mut image).then_some(Permutation { image })
    }
}

/// In-place lexicographic successor; returns `false` when `v` was the last.
pub(crate) fn next_permutation(v: &mut [u8]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// All of `S_n` in lexicographic one-line order.
pub fn all_permutations(n: usize) -> impl Iterator<Item = Permutation> {
    let mut next = Some(Permutation::identity(n));
    std::iter::from_fn(move || {
        let cur = next.take()?;
        next = cur.next_lex();
        Some(cur)
    })
}

/// 0-based `(row, column)` positions read by the z_cat string, adjacent
/// diagonal first, top to bottom within each diagonal.
pub fn z_cat_positions(n: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for offset in 1..n {
        for i in 0..n - offset {
            out.push((i, i + offset));
        }
    }
    out
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (idx, &v) in self.image.iter().enumerate() {
            if idx > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{}", v as usize + 1)?;
        }
        Ok(())
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (idx, &v) in self.image.iter().enumerate() {
            if idx > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}", v as usize + 1)?;
        }
        write!(f, ")")
    }
}

/// Parses whitespace- or comma-separated one-line notation, optionally
/// wrapped in parentheses: `"4 1 3 2"`, `"(4,1,3,2)"`.
impl FromStr for Permutation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let trimmed = s.trim().trim_start_matches('(').trim_end_matches(')');
        let values = trimmed
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<usize>()
                    .map_err(|_| Error::InvalidPermutation(format!("bad entry {t:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Permutation::new(&values)
    }
}

/// `bits[i][j] = (π(i) < π(j))`, stored row-major and 0-based.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IncidenceMatrix {
    n: usize,
    bits: Vec<bool>,
}

impl IncidenceMatrix {
    /// Wraps a row-major grid without checking the order axioms.
    pub fn from_rows(rows: &[Vec<bool>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(Error::NotTotalOrder("matrix is not square".into()));
        }
        Ok(IncidenceMatrix {
            n,
            bits: rows.iter().flatten().copied().collect(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// 1-based entry `x_{i,j}`.
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.bits[(i - 1) * self.n + (j - 1)]
    }

    pub fn rows(&self) -> Vec<Vec<bool>> {
        self.bits.chunks(self.n).map(|r| r.to_vec()).collect()
    }

    /// Checks irreflexivity, asymmetry, totality and transitivity; returns
    /// a description of the first violation.
    pub fn check(&self) -> Result<()> {
        let n = self.n;
        let x = |i: usize, j: usize| self.bits[i * n + j];
        for i in 0..n {
            if x(i, i) {
                return Err(Error::NotTotalOrder(format!("x[{0}][{0}] is set", i + 1)));
            }
            for j in 0..n {
                if i != j && x(i, j) == x(j, i) {
                    return Err(Error::NotTotalOrder(format!(
                        "x[{}][{}] and x[{}][{}] agree",
                        i + 1,
                        j + 1,
                        j + 1,
                        i + 1
                    )));
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                if !x(i, j) {
                    continue;
                }
                for h in 0..n {
                    if x(j, h) && !x(i, h) {
                        return Err(Error::NotTotalOrder(format!(
                            "transitivity fails on ({}, {}, {})",
                            i + 1,
                            j + 1,
                            h + 1
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Recovers `π(j) = 1 + Σ_i x_{i,j}`.
    pub fn to_permutation(&self) -> Result<Permutation> {
        self.check()?;
        let n = self.n;
        let one_line: Vec<usize> = (0..n)
            .map(|j| 1 + (0..n).filter(|&i| self.bits[i * n + j]).count())
            .collect();
        Permutation::new(&one_line)
    }

    pub fn z_cat(&self) -> Vec<bool> {
        z_cat_positions(self.n)
            .into_iter()
            .map(|(i, j)| self.bits[i * self.n + j])
            .collect()
    }
}

/// `bits[i][c] = (π(i) = c)`, stored row-major and 0-based.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PermutationMatrix {
    n: usize,
    bits: Vec<bool>,
}

impl PermutationMatrix {
    pub fn from_rows(rows: &[Vec<bool>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidPermutation("matrix is not square".into()));
        }
        Ok(PermutationMatrix {
            n,
            bits: rows.iter().flatten().copied().collect(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// 1-based entry `t_{i,c}`.
    pub fn get(&self, i: usize, c: usize) -> bool {
        self.bits[(i - 1) * self.n + (c - 1)]
    }

    pub fn rows(&self) -> Vec<Vec<bool>> {
        self.bits.chunks(self.n).map(|r| r.to_vec()).collect()
    }

    /// Reads the permutation off the rows; fails unless every row and every
    /// column holds exactly one set entry.
    pub fn to_permutation(&self) -> Result<Permutation> {
        let n = self.n;
        let mut one_line = Vec::with_capacity(n);
        for (i, row) in self.bits.chunks(n).enumerate() {
            let set: Vec<usize> = (0..n).filter(|&c| row[c]).collect();
            if set.len() != 1 {
                return Err(Error::InvalidPermutation(format!(
                    "row {} has {} set entries",
                    i + 1,
                    set.len()
                )));
            }
            one_line.push(set[0] + 1);
        }
        Permutation::new(&one_line)
    }
}

/// Canonical cycle notation of a permutation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CycleForm {
    cycles: Vec<Vec<usize>>,
}

impl CycleForm {
    /// Validates that `cycles` partition `1..n`, start with their minimum,
    /// and have strictly decreasing leaders.
    pub fn new(cycles: Vec<Vec<usize>>) -> Result<Self> {
        let n: usize = cycles.iter().map(Vec::len).sum();
        if n == 0 {
            return Err(Error::InvalidCycles("no entries".into()));
        }
        let mut seen = vec![false; n];
        for c in &cycles {
            let Some(&lead) = c.first() else {
                return Err(Error::InvalidCycles("empty cycle".into()));
            };
            for &v in c {
                if v == 0 || v > n || seen[v - 1] {
                    return Err(Error::InvalidCycles(format!(
                        "entries do not partition 1..{n}"
                    )));
                }
                seen[v - 1] = true;
                if v < lead {
                    return Err(Error::InvalidCycles(format!(
                        "cycle {c:?} does not start with its minimum"
                    )));
                }
            }
        }
        if cycles.windows(2).any(|w| w[0][0] <= w[1][0]) {
            return Err(Error::InvalidCycles(
                "cycle leaders are not strictly decreasing".into(),
            ));
        }
        Ok(CycleForm { cycles })
    }

    pub fn cycles(&self) -> &[Vec<usize>] {
        &self.cycles
    }

    pub fn n(&self) -> usize {
        self.cycles.iter().map(Vec::len).sum()
    }

    /// The permutation whose one-line notation is the concatenation of the
    /// cycles.
    pub fn linearize(&self) -> Permutation {
        let image = self
            .cycles
            .iter()
            .flatten()
            .map(|&v| (v - 1) as u8)
            .collect();
        Permutation::from_zero_based_unchecked(image)
    }

    /// The permutation these cycles describe.
    pub fn to_permutation(&self) -> Permutation {
        let mut image = vec![0u8; self.n()];
        for c in &self.cycles {
            for (idx, &v) in c.iter().enumerate() {
                image[v - 1] = (c[(idx + 1) % c.len()] - 1) as u8;
            }
        }
        Permutation::from_zero_based_unchecked(image)
    }
}

impl fmt::Display for CycleForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.cycles {
            f.write_str("(")?;
            for (idx, v) in c.iter().enumerate() {
                if idx > 0 {
                    f.write_str(" ")?;
                }
                write!(f, "{v}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}
