//! Finite Ramsey search: homogeneous subsets for colorings of k-subsets, and
//! the min-homogeneity check for regressive set functions.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::tuple::IndexSet;

/// A total coloring of k-subsets, keyed by the sorted element list.
pub type SubsetColoring = BTreeMap<Vec<u64>, u64>;

pub const RAMSEY_EXHAUSTIVE_MAX_E: usize = 20;
pub const RAMSEY_EXHAUSTIVE_MAX_K: usize = 3;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RamseyOutcome {
    pub subset: Option<IndexSet>,
    /// True when every p-subset was inspected, so `None` refutes existence.
    pub exhaustive: bool,
}

/// Search for a p-element subset of E on which the coloring is constant.
/// Exhaustive (lexicographically least witness) within the caps; greedy with
/// an explicit incomplete flag beyond them.
pub fn ramsey_homogeneous(
    coloring: &SubsetColoring,
    e: &IndexSet,
    k: usize,
    p: usize,
) -> Result<RamseyOutcome> {
    // the coloring must be total on S_k(E)
    for s in e.k_subsets(k) {
        if !coloring.contains_key(s.elements()) {
            return Err(Error::MissingKey(crate::tuple::Tuple::new(
                s.elements().to_vec(),
            )));
        }
    }
    if e.len() <= RAMSEY_EXHAUSTIVE_MAX_E && k <= RAMSEY_EXHAUSTIVE_MAX_K {
        for cand in e.k_subsets(p) {
            if is_homogeneous(coloring, &cand, k) {
                return Ok(RamseyOutcome {
                    subset: Some(cand),
                    exhaustive: true,
                });
            }
        }
        Ok(RamseyOutcome {
            subset: None,
            exhaustive: true,
        })
    } else {
        Ok(RamseyOutcome {
            subset: greedy(coloring, e, k, p),
            exhaustive: false,
        })
    }
}

fn is_homogeneous(coloring: &SubsetColoring, cand: &IndexSet, k: usize) -> bool {
    let mut color = None;
    for s in cand.k_subsets(k) {
        let c = coloring[s.elements()];
        match color {
            None => color = Some(c),
            Some(c0) if c0 != c => return false,
            _ => {}
        }
    }
    true
}

/// Grow a candidate greedily, keeping only elements that preserve
/// homogeneity with each color tried in turn.
fn greedy(coloring: &SubsetColoring, e: &IndexSet, k: usize, p: usize) -> Option<IndexSet> {
    let colors: std::collections::BTreeSet<u64> = coloring.values().copied().collect();
    for target in colors {
        let mut chosen: Vec<u64> = Vec::new();
        for &v in e.elements() {
            chosen.push(v);
            let cand = IndexSet::new(chosen.clone());
            let ok = cand
                .k_subsets(k)
                .iter()
                .all(|s| coloring.get(s.elements()) == Some(&target));
            if !ok {
                chosen.pop();
            }
            if chosen.len() == p {
                return Some(IndexSet::new(chosen));
            }
        }
    }
    None
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MinHomogeneityVerdict {
    pub holds: bool,
    /// Failure witness: a pair of k-subsets with equal minima and distinct values.
    pub counterexample: Option<(Vec<u64>, Vec<u64>)>,
    /// Set when |E| < k, so the condition holds with no instances.
    pub vacuous: bool,
}

/// For all x, y in S_k(E) with min(x) = min(y): F(x) = F(y).
pub fn min_homogeneous_check(
    f: &SubsetColoring,
    e: &IndexSet,
    k: usize,
) -> Result<MinHomogeneityVerdict> {
    if e.len() < k {
        return Ok(MinHomogeneityVerdict {
            holds: true,
            counterexample: None,
            vacuous: true,
        });
    }
    let subsets = e.k_subsets(k);
    for x in &subsets {
        let fx = *f
            .get(x.elements())
            .ok_or_else(|| Error::MissingKey(crate::tuple::Tuple::new(x.elements().to_vec())))?;
        for y in &subsets {
            if x.nth(1) != y.nth(1) {
                continue;
            }
            let fy = *f
                .get(y.elements())
                .ok_or_else(|| Error::MissingKey(crate::tuple::Tuple::new(y.elements().to_vec())))?;
            if fx != fy {
                return Ok(MinHomogeneityVerdict {
                    holds: false,
                    counterexample: Some((x.elements().to_vec(), y.elements().to_vec())),
                    vacuous: false,
                });
            }
        }
    }
    Ok(MinHomogeneityVerdict {
        holds: true,
        counterexample: None,
        vacuous: false,
    })
}
