//! Waste indices and the bijection between permutations with `k` fixed
//! points and permutations with `k` waste indices.
//!
//! `phi` writes a permutation in canonical cycle form (min-first cycles,
//! decreasing leaders) and reads the concatenation as one-line notation.
//! `phi_inverse` cuts one-line notation at its prefix minima and reads the
//! blocks back as cycles.

use crate::error::{Error, Result};
use crate::perm::{all_permutations, CycleForm, Permutation};

/// Largest `n` accepted by [`count_by_class`].
pub const MAX_EXHAUSTIVE_N: usize = 9;

/// 1-based positions `j` where `π(j)` is a prefix minimum followed by a
/// descent, plus `n` itself when `π(n) = 1`.
pub fn waste_indices(p: &Permutation) -> Vec<usize> {
    let n = p.n();
    let mut out = Vec::new();
    let mut prefix_min = usize::MAX;
    for j in 0..n {
        let v = p.at(j);
        prefix_min = prefix_min.min(v);
        let is_waste = if j + 1 < n {
            v == prefix_min && v > p.at(j + 1)
        } else {
            v == 0
        };
        if is_waste {
            out.push(j + 1);
        }
    }
    out
}

/// 1-based positions holding a prefix minimum, where `phi_inverse` cuts.
fn prefix_minima(p: &Permutation) -> Vec<usize> {
    let mut out = Vec::new();
    let mut prefix_min = usize::MAX;
    for j in 0..p.n() {
        if p.at(j) < prefix_min {
            prefix_min = p.at(j);
            out.push(j);
        }
    }
    out
}

pub fn phi(p: &Permutation) -> Permutation {
    p.cycle_form().linearize()
}

pub fn phi_inverse(t: &Permutation) -> Permutation {
    let line = t.one_line();
    let mut cuts = prefix_minima(t);
    cuts.push(line.len());
    let cycles: Vec<Vec<usize>> = cuts.windows(2).map(|w| line[w[0]..w[1]].to_vec()).collect();
    // Leaders are prefix minima, hence strictly decreasing and each minimal
    // within its block.
    CycleForm::new(cycles)
        .expect("prefix-minimum segmentation is a canonical cycle form")
        .to_permutation()
}

/// `|D(n,k)|` (exactly `k` fixed points) and `|W(n,k)|` (exactly `k` waste
/// indices) for every `k ∈ 0..=n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassCounts {
    pub n: usize,
    pub fixed_points: Vec<u64>,
    pub waste: Vec<u64>,
}

/// Exhaustive tabulation over `S_n`, streaming one permutation at a time.
pub fn count_by_class(n: usize) -> Result<ClassCounts> {
    if n == 0 || n > MAX_EXHAUSTIVE_N {
        return Err(Error::OutOfRange(format!(
            "exhaustive counting supports 1 <= n <= {MAX_EXHAUSTIVE_N}, got {n}"
        )));
    }
    let mut fixed_points = vec![0u64; n + 1];
    let mut waste = vec![0u64; n + 1];
    for p in all_permutations(n) {
        fixed_points[p.fixed_points().len()] += 1;
        waste[waste_indices(&p).len()] += 1;
    }
    Ok(ClassCounts {
        n,
        fixed_points,
        waste,
    })
}
