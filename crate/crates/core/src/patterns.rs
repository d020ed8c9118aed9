//! Index sets for the counting constraints: semiordered patterns and
//! subpermutations.
//!
//! Enumeration orders are part of the CNF numbering contract:
//! - semiordered patterns are sorted by the increasing tail `(s_2, …, s_j)`
//!   in lexicographic order, then by the head `s_1`;
//! - subpermutations are sorted lexicographically as tuples.

use crate::error::{Error, Result};

/// `(s_1, …, s_j)` with `s_2 < … < s_j` and `s_1` outside the tail.
/// Entries are 1-based.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SemiorderedPattern {
    entries: Vec<usize>,
}

impl SemiorderedPattern {
    pub fn new(n: usize, entries: Vec<usize>) -> Result<Self> {
        let pattern = SemiorderedPattern { entries };
        if pattern.is_valid(n) {
            Ok(pattern)
        } else {
            Err(Error::OutOfRange(format!(
                "{:?} is not a semiordered pattern over 1..{n}",
                pattern.entries
            )))
        }
    }

    fn is_valid(&self, n: usize) -> bool {
        let e = &self.entries;
        !e.is_empty()
            && e.len() <= n
            && e.iter().all(|&v| (1..=n).contains(&v))
            && e[1..].windows(2).all(|w| w[0] < w[1])
            && !e[1..].contains(&e[0])
    }

    pub fn head(&self) -> usize {
        self.entries[0]
    }

    pub fn tail(&self) -> &[usize] {
        &self.entries[1..]
    }

    pub fn entries(&self) -> &[usize] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// An injective map `{1..k} → {1..n}`, stored as `(σ(1), …, σ(k))`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Subpermutation {
    entries: Vec<usize>,
}

impl Subpermutation {
    pub fn new(n: usize, entries: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; n + 1];
        for &v in &entries {
            if v == 0 || v > n || seen[v] {
                return Err(Error::OutOfRange(format!(
                    "{entries:?} is not injective into 1..{n}"
                )));
            }
            seen[v] = true;
        }
        Ok(Subpermutation { entries })
    }

    pub fn entries(&self) -> &[usize] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// All `size`-subsets of `1..=n` in lexicographic order.
pub fn combinations(n: usize, size: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if size > n {
        return out;
    }
    let mut cur: Vec<usize> = (1..=size).collect();
    loop {
        out.push(cur.clone());
        // Rightmost position that can still be incremented.
        let Some(pos) = (0..size).rev().find(|&i| cur[i] < n - (size - 1 - i)) else {
            return out;
        };
        cur[pos] += 1;
        for i in pos + 1..size {
            cur[i] = cur[i - 1] + 1;
        }
    }
}

/// `SOP(n, j)`: exactly `binom(n, j) · j` patterns.
pub fn enumerate_sop(n: usize, j: usize) -> Result<Vec<SemiorderedPattern>> {
    if j == 0 || j > n {
        return Err(Error::OutOfRange(format!("pattern length {j} not in 1..={n}")));
    }
    let mut out = Vec::new();
    for tail in combinations(n, j - 1) {
        for head in (1..=n).filter(|v| !tail.contains(v)) {
            let mut entries = Vec::with_capacity(j);
            entries.push(head);
            entries.extend_from_slice(&tail);
            out.push(SemiorderedPattern { entries });
        }
    }
    Ok(out)
}

/// `Inj(n, k)`: exactly `n! / (n − k)!` subpermutations.
pub fn enumerate_subperms(n: usize, k: usize) -> Result<Vec<Subpermutation>> {
    if k > n {
        return Err(Error::OutOfRange(format!("k = {k} exceeds n = {n}")));
    }
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    let mut used = vec![false; n + 1];
    fn rec(
        n: usize,
        k: usize,
        cur: &mut Vec<usize>,
        used: &mut [bool],
        out: &mut Vec<Subpermutation>,
    ) {
        if cur.len() == k {
            out.push(Subpermutation {
                entries: cur.clone(),
            });
            return;
        }
        for v in 1..=n {
            if !used[v] {
                used[v] = true;
                cur.push(v);
                rec(n, k, cur, used, out);
                cur.pop();
                used[v] = false;
            }
        }
    }
    rec(n, k, &mut cur, &mut used, &mut out);
    Ok(out)
}

pub(crate) fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn sop_counts_small_example() {
        assert_eq!(enumerate_sop(4, 3).unwrap().len(), 12);
        assert_eq!(enumerate_sop(4, 2).unwrap().len(), 12);
        assert_eq!(enumerate_sop(4, 1).unwrap().len(), 4);
        assert_eq!(enumerate_sop(4, 4).unwrap().len(), 4);
        assert!(enumerate_sop(4, 0).is_err());
        assert!(enumerate_sop(4, 5).is_err());
    }

    #[test]
    fn sop_matches_filter_over_all_tuples() {
        let n: usize = 4;
        for j in 1..=n {
            // Brute force: every j-tuple over 1..n that satisfies the definition.
            let mut brute = HashSet::new();
            let total = n.pow(j as u32);
            for code in 0..total {
                let mut c = code;
                let tuple: Vec<usize> = (0..j)
                    .map(|_| {
                        let v = c % n + 1;
                        c /= n;
                        v
                    })
                    .collect();
                if SemiorderedPattern::new(n, tuple.clone()).is_ok() {
                    brute.insert(tuple);
                }
            }
            let listed: HashSet<Vec<usize>> = enumerate_sop(n, j)
                .unwrap()
                .into_iter()
                .map(|p| p.entries().to_vec())
                .collect();
            assert_eq!(listed, brute);
        }
    }

    #[test]
    fn sop_order_is_tail_then_head() {
        let got: Vec<Vec<usize>> = enumerate_sop(3, 2)
            .unwrap()
            .into_iter()
            .map(|p| p.entries().to_vec())
            .collect();
        assert_eq!(
            got,
            vec![
                vec![2, 1],
                vec![3, 1],
                vec![1, 2],
                vec![3, 2],
                vec![1, 3],
                vec![2, 3]
            ]
        );
    }

    #[test]
    fn sop_count_closed_form() {
        for n in 1..=8 {
            for j in 1..=n {
                let pats = enumerate_sop(n, j).unwrap();
                assert_eq!(pats.len() as u128, binomial(n, j) * j as u128);
                let distinct: HashSet<_> = pats.iter().collect();
                assert_eq!(distinct.len(), pats.len());
                for p in &pats {
                    assert!(p.is_valid(n));
                }
            }
        }
    }

    #[test]
    fn subperm_counts() {
        assert_eq!(enumerate_subperms(4, 3).unwrap().len(), 24);
        assert_eq!(enumerate_subperms(7, 1).unwrap().len(), 7);
        assert_eq!(enumerate_subperms(3, 3).unwrap().len(), 6);
        assert_eq!(enumerate_subperms(3, 0).unwrap().len(), 1);
        assert!(enumerate_subperms(3, 4).is_err());
    }

    #[test]
    fn subperms_are_lexicographic_and_match_brute_force() {
        let list: Vec<Vec<usize>> = enumerate_subperms(4, 3)
            .unwrap()
            .into_iter()
            .map(|s| s.entries().to_vec())
            .collect();
        let mut brute = Vec::new();
        for a in 1..=4 {
            for b in 1..=4 {
                for c in 1..=4 {
                    if a != b && b != c && a != c {
                        brute.push(vec![a, b, c]);
                    }
                }
            }
        }
        assert_eq!(list, brute);
        assert!(Subpermutation::new(4, vec![1, 1]).is_err());
    }

    #[test]
    fn combinations_basic() {
        assert_eq!(combinations(4, 2).len(), 6);
        assert_eq!(combinations(3, 0), vec![Vec::<usize>::new()]);
        assert_eq!(combinations(3, 3), vec![vec![1, 2, 3]]);
        assert!(combinations(2, 3).is_empty());
    }
}
