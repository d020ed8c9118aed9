//! Subgroups of `S_n` by brute force, and their conjugacy classes.
//!
//! `subgroups_of_order(n, q)` seeds with every cyclic subgroup whose order
//! divides `q` and repeatedly extends each subgroup by one outside element,
//! keeping closures whose order still divides `q`. Subgroups are keyed by
//! their sorted element lists. Complete for any `(n, q)`; practical for
//! `n ≤ 7`.

use std::collections::{HashMap, HashSet};
use std::fmt;

use crate::bounds::factorial;
use crate::error::{Error, Result};
use crate::perm::{all_permutations, Permutation};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subgroup {
    n: usize,
    /// Sorted; the identity is always first.
    elements: Vec<Permutation>,
    generators: Vec<Permutation>,
}

impl Subgroup {
    pub fn trivial(n: usize) -> Subgroup {
        Subgroup {
            n,
            elements: vec![Permutation::identity(n)],
            generators: Vec::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    /// Sorted element list, identity first.
    pub fn elements(&self) -> &[Permutation] {
        &self.elements
    }

    pub fn generators(&self) -> &[Permutation] {
        &self.generators
    }

    pub fn contains(&self, p: &Permutation) -> bool {
        self.elements.binary_search(p).is_ok()
    }

    /// `ψ G ψ^{-1}`.
    pub fn conjugate(&self, psi: &Permutation) -> Subgroup {
        let inv = psi.inverse();
        let mut elements: Vec<Permutation> = self
            .elements
            .iter()
            .map(|g| psi.compose_unchecked(g).compose_unchecked(&inv))
            .collect();
        elements.sort();
        let generators = minimal_generators(&elements);
        Subgroup {
            n: self.n,
            elements,
            generators,
        }
    }

    /// Checks identity, closure and inverses from scratch.
    pub fn is_group(&self) -> bool {
        let set: HashSet<&Permutation> = self.elements.iter().collect();
        self.elements[0].is_identity()
            && self.elements.iter().all(|a| {
                set.contains(&a.inverse())
                    && self
                        .elements
                        .iter()
                        .all(|b| set.contains(&a.compose_unchecked(b)))
            })
    }

    /// Generators in the generator-file syntax: `2 1 3 4; 2 3 1 4`. The
    /// trivial group is written as its identity.
    pub fn generator_line(&self) -> String {
        if self.generators.is_empty() {
            return Permutation::identity(self.n).to_string();
        }
        self.generators
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join("; ")
    }
}

impl fmt::Debug for Subgroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Subgroup(order {}, <{}>)", self.order(), self.generator_line())
    }
}

/// Order of a single permutation (lcm of its cycle lengths).
pub fn element_order(p: &Permutation) -> usize {
    p.cycle_form()
        .cycles()
        .iter()
        .fold(1, |acc, c| num_integer::lcm(acc, c.len()))
}

/// Grows `start` (which must already be closed) by right-multiplying with
/// `gens` until closed. Returns `None` as soon as the set exceeds `cap`.
fn grow(start: &[Permutation], gens: &[Permutation], cap: usize) -> Option<Vec<Permutation>> {
    let mut set: HashSet<Permutation> = start.iter().cloned().collect();
    let mut queue: Vec<Permutation> = start.to_vec();
    let mut head = 0;
    while head < queue.len() {
        let e = queue[head].clone();
        head += 1;
        for g in gens {
            let h = e.compose_unchecked(g);
            if !set.contains(&h) {
                if set.len() == cap {
                    return None;
                }
                set.insert(h.clone());
                queue.push(h);
            }
        }
    }
    let mut elements: Vec<Permutation> = set.into_iter().collect();
    elements.sort();
    Some(elements)
}

/// Greedy generating set: scan elements in order, keep those outside the
/// span of the ones kept so far.
fn minimal_generators(elements: &[Permutation]) -> Vec<Permutation> {
    let n = elements[0].n();
    let mut gens: Vec<Permutation> = Vec::new();
    let mut span = vec![Permutation::identity(n)];
    // High-order elements first keeps the list short.
    let mut candidates: Vec<&Permutation> = elements.iter().collect();
    candidates.sort_by_key(|e| std::cmp::Reverse(element_order(e)));
    for e in candidates {
        if span.binary_search(e).is_ok() {
            continue;
        }
        gens.push(e.clone());
        span = grow(&span, &gens, usize::MAX).expect("uncapped");
        if span.len() == elements.len() {
            break;
        }
    }
    gens
}

/// Smallest subgroup containing `gens`.
pub fn closure(n: usize, gens: &[Permutation]) -> Result<Subgroup> {
    if let Some(bad) = gens.iter().find(|g| g.n() != n) {
        return Err(Error::SizeMismatch {
            expected: n,
            found: bad.n(),
        });
    }
    let elements = grow(&[Permutation::identity(n)], gens, usize::MAX).expect("uncapped");
    let generators = minimal_generators(&elements);
    Ok(Subgroup {
        n,
        elements,
        generators,
    })
}

fn from_elements(n: usize, elements: Vec<Permutation>) -> Subgroup {
    let generators = minimal_generators(&elements);
    Subgroup {
        n,
        elements,
        generators,
    }
}

/// Largest `n` for which [`subgroups_of_order`] enumerates `S_n`.
pub const MAX_ENUMERATION_N: usize = 8;

/// Every subgroup of `S_n` of order `q`, sorted by element list.
pub fn subgroups_of_order(n: usize, q: usize) -> Result<Vec<Subgroup>> {
    if n == 0 || n > MAX_ENUMERATION_N {
        return Err(Error::OutOfRange(format!(
            "subgroup enumeration supports 1 <= n <= {MAX_ENUMERATION_N}, got {n}"
        )));
    }
    let group_order = factorial(n)?;
    if q == 0 || group_order % q as u128 != 0 {
        return Err(Error::OutOfRange(format!("{q} does not divide {n}! = {group_order}")));
    }
    if q == 1 {
        return Ok(vec![Subgroup::trivial(n)]);
    }
    // Only elements whose order divides q can lie in a subgroup of order q.
    let candidates: Vec<Permutation> = all_permutations(n)
        .filter(|p| q % element_order(p) == 0)
        .collect();

    let mut found: HashSet<Vec<Permutation>> = HashSet::new();
    let mut layer: Vec<Vec<Permutation>> = Vec::new();
    let id = [Permutation::identity(n)];
    for g in candidates.iter().filter(|g| !g.is_identity()) {
        let cyclic = grow(&id, std::slice::from_ref(g), q).expect("element order divides q");
        if found.insert(cyclic.clone()) {
            layer.push(cyclic);
        }
    }

    while !layer.is_empty() {
        let mut next = Vec::new();
        for h in &layer {
            if h.len() == q {
                continue;
            }
            let h_gens = minimal_generators(h);
            let mut covered: HashSet<&Permutation> = h.iter().collect();
            let mut extensions: Vec<Vec<Permutation>> = Vec::new();
            for g in &candidates {
                if covered.contains(g) {
                    continue;
                }
                let mut gens = h_gens.clone();
                gens.push(g.clone());
                let extension = grow(h, &gens, q).filter(|k| q % k.len() == 0);
                // Every element of the double coset HgH yields the same
                // extension.
                for a in h {
                    let ag = a.compose_unchecked(g);
                    for b in h {
                        let e = ag.compose_unchecked(b);
                        if let Ok(idx) = candidates.binary_search(&e) {
                            covered.insert(&candidates[idx]);
                        }
                    }
                }
                extensions.extend(extension);
            }
            for k in extensions {
                if found.insert(k.clone()) {
                    next.push(k);
                }
            }
        }
        layer = next;
    }

    let mut result: Vec<Vec<Permutation>> = found.into_iter().filter(|s| s.len() == q).collect();
    result.sort();
    Ok(result.into_iter().map(|e| from_elements(n, e)).collect())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConjugacyClassOfSubgroups {
    /// Key-minimal member.
    pub representative: Subgroup,
    pub members: Vec<Subgroup>,
    pub size: usize,
}

/// Partitions `subs` into conjugacy classes under `S_n`. Classes are
/// ordered by representative; members keep their input order.
///
/// The input must be closed under conjugation (e.g. all subgroups of one
/// order).
pub fn conjugacy_classes(subs: &[Subgroup], n: usize) -> Result<Vec<ConjugacyClassOfSubgroups>> {
    let index: HashMap<&[Permutation], usize> = subs
        .iter()
        .enumerate()
        .map(|(i, s)| (s.elements(), i))
        .collect();
    // S_n is generated by (1 2) and (1 2 … n).
    let mut sn_gens = Vec::new();
    if n >= 2 {
        let mut swap: Vec<usize> = (1..=n).collect();
        swap.swap(0, 1);
        sn_gens.push(Permutation::new(&swap)?);
        let cycle: Vec<usize> = (1..=n).map(|i| i % n + 1).collect();
        sn_gens.push(Permutation::new(&cycle)?);
    }
    let mut class_of = vec![usize::MAX; subs.len()];
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for start in 0..subs.len() {
        if class_of[start] != usize::MAX {
            continue;
        }
        let id = classes.len();
        class_of[start] = id;
        let mut orbit = vec![start];
        let mut head = 0;
        while head < orbit.len() {
            let cur = orbit[head];
            head += 1;
            for psi in &sn_gens {
                let conj = subs[cur].conjugate(psi);
                let &j = index.get(conj.elements()).ok_or_else(|| {
                    Error::InvalidConfig(
                        "subgroup list is not closed under conjugation".into(),
                    )
                })?;
                if class_of[j] == usize::MAX {
                    class_of[j] = id;
                    orbit.push(j);
                }
            }
        }
        orbit.sort_unstable();
        classes.push(orbit);
    }
    let mut out: Vec<ConjugacyClassOfSubgroups> = classes
        .into_iter()
        .map(|members| {
            let members: Vec<Subgroup> = members.into_iter().map(|i| subs[i].clone()).collect();
            let representative = members
                .iter()
                .min_by(|a, b| a.elements.cmp(&b.elements))
                .expect("non-empty class")
                .clone();
            ConjugacyClassOfSubgroups {
                representative,
                size: members.len(),
                members,
            }
        })
        .collect();
    out.sort_by(|a, b| a.representative.elements.cmp(&b.representative.elements));
    Ok(out)
}

/// One subgroup per non-empty, non-comment line; generators separated by
/// `;`, each in one-line notation.
pub fn parse_generator_file(text: &str) -> Result<Vec<Subgroup>> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let gens = line
            .split(';')
            .map(|g| {
                g.parse::<Permutation>().map_err(|e| Error::Parse {
                    line: idx + 1,
                    msg: e.to_string(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let n = gens[0].n();
        out.push(closure(n, &gens).map_err(|e| Error::Parse {
            line: idx + 1,
            msg: e.to_string(),
        })?);
    }
    Ok(out)
}

/// Orders `q` dividing both `d` and `n!`, descending.
pub fn sweep_orders(n: usize, d: usize) -> Result<Vec<usize>> {
    let nf = factorial(n)?;
    Ok((1..=d)
        .rev()
        .filter(|&q| d % q == 0 && nf % q as u128 == 0)
        .collect())
}
