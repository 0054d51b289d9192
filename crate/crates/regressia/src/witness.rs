//! Budgeted searches for the sets promised by the finite theorems, the §1
//! reduction gadgets, and exact micro-scale thresholds. Found witnesses are
//! always re-verified by an independent recount; absence within budget is
//! reported as inconclusive, never as refutation.

use std::collections::BTreeSet;

use rand::{seq::SliceRandom, Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::assignment::FunctionAssignment;
use crate::decreasing::ramsey_reduce;
use crate::error::{Error, Result};
use crate::order_type::ot;
use crate::ramsey::{min_homogeneous_check, SubsetColoring};
use crate::regressive::regressive_values;
use crate::tuple::{IndexSet, Tuple, TupleMap, TupleSet, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchStrategy {
    Exhaustive,
    GreedyRamsey,
    RandomRestart,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchBudget {
    pub max_candidates: u64,
    pub strategy: SearchStrategy,
    pub seed: u64,
}

impl SearchBudget {
    pub fn exhaustive(max_candidates: u64) -> Self {
        SearchBudget {
            max_candidates,
            strategy: SearchStrategy::Exhaustive,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Witness {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<TupleSet>,
    pub e: IndexSet,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SearchReport {
    pub statement: String,
    pub params: serde_json::Value,
    pub witness: Option<Witness>,
    /// Regressive values found on the witness (0 when no witness).
    pub count: u64,
    pub target: u64,
    /// True only when an independent recount on the witness confirms count
    /// and count ≤ target.
    pub verified: bool,
    pub explored: u64,
    pub seed: u64,
    /// The bound holds for cardinality reasons alone at these parameters.
    pub vacuous: bool,
}

/// Independent recount of regressive values of a tuple map over E^k.
/// Deliberately re-derives everything from raw loops: it shares no counting
/// code with the search path.
pub fn recount_regressive(f: &TupleMap, e: &[u64], k: usize) -> Result<u64> {
    let mut distinct: BTreeSet<Vec<u64>> = BTreeSet::new();
    let mut idx = vec![0usize; k];
    if e.is_empty() && k > 0 {
        return Ok(0);
    }
    loop {
        let coords: Vec<u64> = idx.iter().map(|&i| e[i]).collect();
        let mut min = u64::MAX;
        for &c in &coords {
            if c < min {
                min = c;
            }
        }
        let x = Tuple::new(coords);
        let value = f.get(&x).ok_or_else(|| Error::MissingKey(x.clone()))?;
        let (sup, raw) = match value {
            Value::Scalar(s) => (*s, vec![*s]),
            Value::Vector(t) => {
                let mut m = 0u64;
                for &c in t.coords() {
                    if c > m {
                        m = c;
                    }
                }
                (m, t.coords().to_vec())
            }
        };
        if sup < min {
            distinct.insert(raw);
        }
        // odometer over index vectors
        let mut pos = k;
        loop {
            if pos == 0 {
                return Ok(distinct.len() as u64);
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < e.len() {
                break;
            }
            idx[pos] = 0;
        }
    }
}

fn count_on_subset(f: &TupleMap, e: &IndexSet, k: usize) -> Result<u64> {
    let pts = e.power(k);
    Ok(regressive_values(f, &pts)?.len() as u64)
}

fn binomial_u128(n: u64, p: u64) -> u128 {
    if p > n {
        return 0;
    }
    let mut acc: u128 = 1;
    for i in 0..p {
        acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    acc
}

/// Search for E of size p on which a total map over [n]^k has at most
/// (k^k)·p regressive values.
pub fn find_witness_04(
    f: &TupleMap,
    n: u64,
    k: usize,
    p: usize,
    budget: &SearchBudget,
) -> Result<SearchReport> {
    let domain = IndexSet::range(n).power(k);
    for x in domain.iter() {
        if f.get(x).is_none() {
            return Err(Error::MissingKey(x.clone()));
        }
    }
    if (p as u64) > n {
        return Err(Error::Precondition(format!("p = {p} exceeds n = {n}")));
    }
    let target = (k as u64).pow(k as u32) * p as u64;
    let vacuous = target as u128 >= (p as u128).pow(k as u32);
    let all = IndexSet::range(n);

    let mut best: Option<(u64, IndexSet)> = None;
    let mut explored = 0u64;
    match budget.strategy {
        SearchStrategy::Exhaustive => {
            let cands = binomial_u128(n, p as u64);
            if cands > budget.max_candidates as u128 {
                return Err(Error::Budget {
                    task: "exhaustive witness search",
                    needed: cands,
                    cap: budget.max_candidates as u128,
                });
            }
            for e in all.k_subsets(p) {
                explored += 1;
                let c = count_on_subset(f, &e, k)?;
                if best.as_ref().map_or(true, |(bc, _)| c < *bc) {
                    best = Some((c, e));
                }
            }
        }
        SearchStrategy::GreedyRamsey => {
            let mut chosen: Vec<u64> = Vec::new();
            for v in 0..n {
                if explored >= budget.max_candidates {
                    break;
                }
                chosen.push(v);
                explored += 1;
                let c = count_on_subset(f, &IndexSet::new(chosen.clone()), k)?;
                if c > target {
                    chosen.pop();
                }
                if chosen.len() == p {
                    break;
                }
            }
            if chosen.len() == p {
                let e = IndexSet::new(chosen);
                let c = count_on_subset(f, &e, k)?;
                best = Some((c, e));
            }
        }
        SearchStrategy::RandomRestart => {
            let mut rng = ChaCha8Rng::seed_from_u64(budget.seed);
            let pool: Vec<u64> = (0..n).collect();
            for _ in 0..budget.max_candidates {
                explored += 1;
                let mut pick: Vec<u64> = pool
                    .choose_multiple(&mut rng, p)
                    .copied()
                    .collect();
                pick.sort_unstable();
                let e = IndexSet::new(pick);
                let c = count_on_subset(f, &e, k)?;
                if best.as_ref().map_or(true, |(bc, be)| c < *bc || (c == *bc && e < *be)) {
                    best = Some((c, e));
                }
            }
        }
    }

    let mut report = SearchReport {
        statement: "theorem-0.4".into(),
        params: json!({ "n": n, "k": k, "p": p }),
        witness: None,
        count: 0,
        target,
        verified: false,
        explored,
        seed: budget.seed,
        vacuous,
    };
    if let Some((c, e)) = best {
        if c <= target {
            let recount = recount_regressive(f, e.elements(), k)?;
            report.verified = recount == c && c <= target;
            report.count = c;
            report.witness = Some(Witness { a: None, e });
        }
    }
    Ok(report)
}

/// Minimal regressive-value count over all |E| = p subsets — exhaustive,
/// used by micro-scale monotonicity probes.
pub fn min_count_over_subsets(f: &TupleMap, n: u64, k: usize, p: usize) -> Result<u64> {
    let mut best = u64::MAX;
    for e in IndexSet::range(n).k_subsets(p) {
        best = best.min(count_on_subset(f, &e, k)?);
    }
    Ok(best)
}

/// Search for a pair (A, E) with U(A) having at most ot(k) regressive
/// values on E^k. The coarser k^k bound is reported in params.
pub fn find_witness_a(
    u: &FunctionAssignment,
    p: usize,
    budget: &SearchBudget,
) -> Result<SearchReport> {
    let k = u.arity;
    let fld: Vec<u64> = u.ground.field().into_iter().collect();
    let target = ot(k)?;
    let kk = (k as u64).pow(k as u32);

    // candidate carriers: S^k for S ⊆ fld(ground), restricted to those that
    // land inside the ground
    let mut best: Option<(u64, TupleSet, IndexSet)> = None;
    let mut explored = 0u64;
    let consider =
        |s_elems: &[u64], u: &FunctionAssignment, explored: &mut u64, best: &mut Option<(u64, TupleSet, IndexSet)>| -> Result<()> {
            let s = IndexSet::new(s_elems.to_vec());
            let a = s.power(k);
            if !a.is_subset(&u.ground) {
                return Ok(());
            }
            let endo = u.apply(&a)?;
            let map = endo.to_tuple_map();
            for e in s.k_subsets(p) {
                *explored += 1;
                let c = count_on_subset(&map, &e, k)?;
                let replace = match best {
                    None => true,
                    Some((bc, ba, be)) => {
                        c < *bc || (c == *bc && (&a, &e) < (&*ba, &*be))
                    }
                };
                if replace {
                    *best = Some((c, a.clone(), e));
                }
            }
            Ok(())
        };

    match budget.strategy {
        SearchStrategy::Exhaustive => {
            let pairs: u128 = (1u128 << fld.len().min(127)) * binomial_u128(fld.len() as u64, p as u64);
            if pairs > budget.max_candidates as u128 {
                return Err(Error::Budget {
                    task: "exhaustive assignment witness search",
                    needed: pairs,
                    cap: budget.max_candidates as u128,
                });
            }
            let base = IndexSet::new(fld.clone());
            for size in p..=fld.len() {
                for s in base.k_subsets(size) {
                    consider(s.elements(), u, &mut explored, &mut best)?;
                }
            }
        }
        SearchStrategy::GreedyRamsey => {
            // single Ramsey reduction over the full field
            let e_all = IndexSet::new(fld.clone());
            let a = e_all.power(k);
            if a.is_subset(&u.ground) {
                let out = ramsey_reduce(u, &a, &e_all, p)?;
                explored += 1;
                if let (Some(e), Some(c)) = (out.subset, out.regressive_count) {
                    best = Some((c as u64, a, e));
                }
            }
        }
        SearchStrategy::RandomRestart => {
            let mut rng = ChaCha8Rng::seed_from_u64(budget.seed);
            while explored < budget.max_candidates {
                let size = rng.gen_range(p..=fld.len().max(p));
                let mut s: Vec<u64> = fld
                    .choose_multiple(&mut rng, size.min(fld.len()))
                    .copied()
                    .collect();
                s.sort_unstable();
                if s.len() < p {
                    break;
                }
                let before = explored;
                consider(&s, u, &mut explored, &mut best)?;
                if explored == before {
                    explored += 1; // carrier escaped the ground; still budgeted
                }
            }
        }
    }

    let mut report = SearchReport {
        statement: "proposition-A".into(),
        params: json!({ "k": k, "p": p, "kk": kk }),
        witness: None,
        count: 0,
        target,
        verified: false,
        explored,
        seed: budget.seed,
        vacuous: false,
    };
    if let Some((c, a, e)) = best {
        if c <= target {
            let endo = u.apply(&a)?;
            let recount = recount_regressive(&endo.to_tuple_map(), e.elements(), k)?;
            report.verified = recount == c && c <= target;
            report.count = c;
            report.witness = Some(Witness { a: Some(a), e });
        }
    }
    Ok(report)
}

/// Regressivity of a set function: F(A) < min(A) whenever min(A) > 0.
fn check_set_function_regressive(f: &SubsetColoring) -> Result<()> {
    for (a, &v) in f {
        let min = *a.first().expect("subset keys are nonempty");
        if min > 0 && v >= min {
            return Err(Error::NotRegressive(a.clone(), v, min));
        }
    }
    Ok(())
}

/// The Lemma 1.3 transformation: a regressive set function is rebuilt by a
/// three-case ladder (small gap; large power-of-two drop; fallthrough to F).
pub fn gadget_lemma_1_3(f: &SubsetColoring) -> Result<SubsetColoring> {
    check_set_function_regressive(f)?;
    let mut g = SubsetColoring::new();
    for (a, &fv) in f {
        let a1 = a[0];
        let a2 = *a.get(1).ok_or_else(|| {
            Error::Precondition("lemma 1.3 needs sets of at least two elements".into())
        })?;
        let value = if a2 - a1 < a1 {
            a2 - a1
        } else if let Some(j) = greatest_power_drop(a1, a2) {
            j
        } else {
            fv
        };
        g.insert(a.clone(), value);
    }
    check_set_function_regressive(&g)?;
    Ok(g)
}

/// The greatest j < a1 with 2^j > a2, if any.
fn greatest_power_drop(a1: u64, a2: u64) -> Option<u64> {
    (0..a1)
        .rev()
        .find(|&j| j >= 64 || (1u128 << j) > a2 as u128)
}

/// The Lemma 1.5 transformation: a regressive set function becomes a pair-
/// valued tuple map, recording (F of the range, |min − 1|) on strictly
/// increasing tuples and (0,0) elsewhere.
pub fn gadget_lemma_1_5(f: &SubsetColoring, n: u64, k: usize) -> Result<TupleMap> {
    check_set_function_regressive(f)?;
    let mut g = TupleMap::new();
    for x in IndexSet::range(n).power(k).iter() {
        let value = if x.is_strictly_increasing() {
            let rng: Vec<u64> = x.coords().to_vec();
            let fv = *f
                .get(&rng)
                .ok_or_else(|| Error::MissingKey(x.clone()))?;
            let m = x.min_coord();
            Tuple::new(vec![fv, m.abs_diff(1)])
        } else {
            Tuple::new(vec![0, 0])
        };
        g.insert(x.clone(), Value::Vector(value));
    }
    Ok(g)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TheoremIvVerdict {
    pub holds: bool,
    /// Every x < y from E satisfies 2^x < y.
    pub spread_ok: bool,
    pub min_homogeneous: bool,
}

/// 2^x < y, safe for the whole u64 range.
pub fn pow2_less(x: u64, y: u64) -> bool {
    x < 64 && (1u128 << x) < y as u128
}

/// Theorem IV's conjunction: min-homogeneity together with the
/// doubling-exponential spread of E.
pub fn theorem_iv_check(f: &SubsetColoring, e: &IndexSet, k: usize) -> Result<TheoremIvVerdict> {
    let elems = e.elements();
    let mut spread_ok = true;
    'outer: for i in 0..elems.len() {
        for j in i + 1..elems.len() {
            if !pow2_less(elems[i], elems[j]) {
                spread_ok = false;
                break 'outer;
            }
        }
    }
    if !spread_ok {
        // false regardless of F; F is not consulted
        return Ok(TheoremIvVerdict {
            holds: false,
            spread_ok: false,
            min_homogeneous: false,
        });
    }
    let mh = min_homogeneous_check(f, e, k)?;
    Ok(TheoremIvVerdict {
        holds: mh.holds,
        spread_ok,
        min_homogeneous: mh.holds,
    })
}

// ---------------------------------------------------------------------------
// Exact thresholds: the least n at which a statement holds for every F.

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ThresholdStatement {
    #[serde(rename = "0.3")]
    Zero3,
    #[serde(rename = "0.4")]
    Zero4,
    #[serde(rename = "I")]
    TheoremI,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ThresholdRow {
    pub n: u64,
    pub holds: bool,
    /// A counterexample F (domain point ↦ value), present when holds is false
    /// for a non-cardinality reason.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Vec<(Vec<u64>, Vec<u64>)>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ThresholdReport {
    pub statement: ThresholdStatement,
    pub k: usize,
    pub r: usize,
    pub p: usize,
    pub n_max: u64,
    pub rows: Vec<ThresholdRow>,
    /// Least n with every n′ in [n, n_max] confirmed.
    pub least_confirmed: Option<u64>,
}

/// Cap on the number of adversary functions enumerated per n.
pub const THRESHOLD_F_SPACE_CAP: u128 = 1 << 21;

/// Exhaustively decide, for each n up to n_max, whether every admissible F
/// admits the required E. No sampling: exact or refused.
pub fn threshold_h(
    statement: ThresholdStatement,
    k: usize,
    r: usize,
    p: usize,
    n_max: u64,
) -> Result<ThresholdReport> {
    let mut rows = Vec::new();
    for n in 1..=n_max {
        let row = match statement {
            ThresholdStatement::Zero3 => threshold_row_03_04(n, k, r, p, true)?,
            ThresholdStatement::Zero4 => threshold_row_03_04(n, k, r, p, false)?,
            ThresholdStatement::TheoremI => threshold_row_i(n, k, p)?,
        };
        rows.push(row);
    }
    let mut least = None;
    for row in rows.iter().rev() {
        if row.holds {
            least = Some(row.n);
        } else {
            break;
        }
    }
    Ok(ThresholdReport {
        statement,
        k,
        r,
        p,
        n_max,
        rows,
        least_confirmed: least,
    })
}

/// One row of the 0.3 / 0.4 adversary game: quantify over all
/// F: [n]^k → [n]^r (for 0.3 only those with |F(x)| ≤ min(x)).
fn threshold_row_03_04(n: u64, k: usize, r: usize, p: usize, image_form: bool) -> Result<ThresholdRow> {
    if (p as u64) > n {
        return Ok(ThresholdRow {
            n,
            holds: false,
            counterexample: None,
        });
    }
    let domain: Vec<Tuple> = IndexSet::range(n).power(k).iter().cloned().collect();
    let codomain: Vec<Tuple> = IndexSet::range(n).power(r).iter().cloned().collect();
    // per-point admissible values
    let choices: Vec<Vec<&Tuple>> = domain
        .iter()
        .map(|x| {
            codomain
                .iter()
                .filter(|v| !image_form || v.sup() <= x.min_coord())
                .collect()
        })
        .collect();
    let space: u128 = choices
        .iter()
        .try_fold(1u128, |acc, c| acc.checked_mul(c.len() as u128))
        .unwrap_or(u128::MAX);
    if space > THRESHOLD_F_SPACE_CAP {
        return Err(Error::Budget {
            task: "threshold adversary enumeration",
            needed: space,
            cap: THRESHOLD_F_SPACE_CAP,
        });
    }
    let target = (k as u64).pow(k as u32) * p as u64;
    let subsets = IndexSet::range(n).k_subsets(p);

    let mut idx = vec![0usize; domain.len()];
    loop {
        let mut f = TupleMap::new();
        for (pos, x) in domain.iter().enumerate() {
            f.insert(x.clone(), Value::Vector(choices[pos][idx[pos]].clone()));
        }
        let ok = subsets.iter().any(|e| {
            let bound = if image_form {
                image_size(&f, e, k)
            } else {
                count_on_subset(&f, e, k).expect("total map")
            };
            bound <= target
        });
        if !ok {
            let ce = domain
                .iter()
                .enumerate()
                .map(|(pos, x)| (x.coords().to_vec(), choices[pos][idx[pos]].coords().to_vec()))
                .collect();
            return Ok(ThresholdRow {
                n,
                holds: false,
                counterexample: Some(ce),
            });
        }
        if !advance(&mut idx, &choices) {
            break;
        }
    }
    Ok(ThresholdRow {
        n,
        holds: true,
        counterexample: None,
    })
}

fn image_size(f: &TupleMap, e: &IndexSet, k: usize) -> u64 {
    let mut img = BTreeSet::new();
    for x in e.power(k).iter() {
        img.insert(f.get(x).unwrap().clone());
    }
    img.len() as u64
}

fn advance<T>(idx: &mut [usize], choices: &[Vec<T>]) -> bool {
    for pos in (0..idx.len()).rev() {
        idx[pos] += 1;
        if idx[pos] < choices[pos].len() {
            return true;
        }
        idx[pos] = 0;
    }
    false
}

/// One row of the Theorem I adversary game: quantify over all regressive
/// F: S_k[n] → [n] (value 0 on sets with minimum 0).
fn threshold_row_i(n: u64, k: usize, p: usize) -> Result<ThresholdRow> {
    if (p as u64) > n {
        return Ok(ThresholdRow {
            n,
            holds: false,
            counterexample: None,
        });
    }
    let domain: Vec<Vec<u64>> = IndexSet::range(n)
        .k_subsets(k)
        .into_iter()
        .map(|s| s.elements().to_vec())
        .collect();
    let choices: Vec<Vec<u64>> = domain
        .iter()
        .map(|a| {
            let min = a[0];
            if min == 0 {
                vec![0]
            } else {
                (0..min).collect()
            }
        })
        .collect();
    let space: u128 = choices
        .iter()
        .try_fold(1u128, |acc, c| acc.checked_mul(c.len() as u128))
        .unwrap_or(u128::MAX);
    if space > THRESHOLD_F_SPACE_CAP {
        return Err(Error::Budget {
            task: "threshold adversary enumeration",
            needed: space,
            cap: THRESHOLD_F_SPACE_CAP,
        });
    }
    let e_all = IndexSet::range(n);
    let subsets = e_all.k_subsets(p);
    let mut idx = vec![0usize; domain.len()];
    loop {
        let f: SubsetColoring = domain
            .iter()
            .enumerate()
            .map(|(pos, a)| (a.clone(), choices[pos][idx[pos]]))
            .collect();
        let ok = subsets
            .iter()
            .any(|e| min_homogeneous_check(&f, e, k).map(|v| v.holds).unwrap_or(false));
        if !ok {
            let ce = domain
                .iter()
                .enumerate()
                .map(|(pos, a)| (a.clone(), vec![choices[pos][idx[pos]]]))
                .collect();
            return Ok(ThresholdRow {
                n,
                holds: false,
                counterexample: Some(ce),
            });
        }
        if !advance(&mut idx, &choices) {
            break;
        }
    }
    Ok(ThresholdRow {
        n,
        holds: true,
        counterexample: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assignment::Rule;

    fn square_diff_map(n: u64) -> TupleMap {
        let mut f = TupleMap::new();
        for x in IndexSet::range(n).power(2).iter() {
            let (a, b) = (x.coords()[0], x.coords()[1]);
            let d = a.abs_diff(b);
            let v = (d * d).min(n - 1);
            f.insert(x.clone(), Value::Scalar(v));
        }
        f
    }

    #[test]
    fn identity_map_has_no_regressive_values() {
        let mut f = TupleMap::new();
        for x in IndexSet::range(6).power(1).iter() {
            f.insert(x.clone(), Value::Vector(x.clone()));
        }
        let report = find_witness_04(&f, 6, 1, 3, &SearchBudget::exhaustive(1000)).unwrap();
        let w = report.witness.unwrap();
        assert_eq!(w.e.elements(), &[0, 1, 2]);
        assert_eq!(report.count, 0);
        assert!(report.verified);
    }

    #[test]
    fn truncated_square_difference_meets_the_bound() {
        let f = square_diff_map(12);
        let report = find_witness_04(&f, 12, 2, 5, &SearchBudget::exhaustive(1000)).unwrap();
        assert!(report.verified);
        assert!(report.count <= 20);
        assert_eq!(report.explored, 792);
    }

    #[test]
    fn vacuous_flag_matches_the_cardinality_inequality() {
        let f = square_diff_map(6);
        // k=2, p=2: (k^k)p = 8 >= p^k = 4 → vacuous
        let r = find_witness_04(&f, 6, 2, 2, &SearchBudget::exhaustive(100)).unwrap();
        assert!(r.vacuous);
        let r = find_witness_04(&f, 6, 2, 5, &SearchBudget::exhaustive(100)).unwrap();
        assert!(!r.vacuous);
    }

    #[test]
    fn random_restart_is_deterministic() {
        let f = square_diff_map(10);
        let budget = SearchBudget {
            max_candidates: 50,
            strategy: SearchStrategy::RandomRestart,
            seed: 9,
        };
        let a = find_witness_04(&f, 10, 2, 4, &budget).unwrap();
        let b = find_witness_04(&f, 10, 2, 4, &budget).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn min_count_nondecreasing_in_p() {
        let f = square_diff_map(8);
        let mut last = 0;
        for p in 1..=5 {
            let c = min_count_over_subsets(&f, 8, 2, p).unwrap();
            assert!(c >= last, "count dropped from {last} to {c} at p={p}");
            last = c;
        }
    }

    #[test]
    fn proposition_a_witness_on_min_collapse() {
        let ground = TupleSet::new(1, (0..8).map(Tuple::scalar)).unwrap();
        let u = FunctionAssignment::new(1, ground, Rule::MinCollapse).unwrap();
        let report = find_witness_a(&u, 3, &SearchBudget::exhaustive(100_000)).unwrap();
        assert!(report.verified);
        assert!(report.count <= 1);
        assert_eq!(report.target, 1);
    }

    #[test]
    fn lemma_1_3_cases() {
        // A = (3,4): gap 1 < 3 → case 1
        let mut f = SubsetColoring::new();
        f.insert(vec![3, 4], 2);
        // A = (1,2): gap 1 not < 1; no j < 1 with 2^j > 2 → case 3
        f.insert(vec![1, 2], 0);
        // A = (5,9): gap 4 not < 5; greatest j < 5 with 2^j > 9 is 4 → case 2
        f.insert(vec![5, 9], 1);
        let g = gadget_lemma_1_3(&f).unwrap();
        assert_eq!(g[&vec![3, 4]], 1);
        assert_eq!(g[&vec![1, 2]], 0);
        assert_eq!(g[&vec![5, 9]], 4);
    }

    #[test]
    fn lemma_1_3_rejects_non_regressive_input() {
        let mut f = SubsetColoring::new();
        f.insert(vec![2, 3], 5);
        assert!(matches!(
            gadget_lemma_1_3(&f),
            Err(Error::NotRegressive(..))
        ));
    }

    #[test]
    fn lemma_1_3_output_regressive_on_all_small_inputs() {
        // all regressive F on S_2[6] with canonical value min-1 (or 0)
        let domain: Vec<Vec<u64>> = IndexSet::range(6)
            .k_subsets(2)
            .into_iter()
            .map(|s| s.elements().to_vec())
            .collect();
        let f: SubsetColoring = domain
            .iter()
            .map(|a| (a.clone(), a[0].saturating_sub(1)))
            .collect();
        let g = gadget_lemma_1_3(&f).unwrap();
        for (a, v) in &g {
            assert!(a[0] == 0 || *v < a[0]);
        }
    }

    #[test]
    fn lemma_1_5_shapes() {
        let mut f = SubsetColoring::new();
        for s in IndexSet::range(4).k_subsets(2) {
            let a = s.elements().to_vec();
            let v = a[0].saturating_sub(1);
            f.insert(a, v);
        }
        let g = gadget_lemma_1_5(&f, 4, 2).unwrap();
        assert_eq!(
            g.get(&Tuple::new(vec![2, 1])),
            Some(&Value::Vector(Tuple::new(vec![0, 0])))
        );
        assert_eq!(
            g.get(&Tuple::new(vec![2, 3])),
            Some(&Value::Vector(Tuple::new(vec![1, 1])))
        );
        // min(x) = 0 → second coordinate |0 - 1| = 1
        assert_eq!(
            g.get(&Tuple::new(vec![0, 1])),
            Some(&Value::Vector(Tuple::new(vec![0, 1])))
        );
    }

    #[test]
    fn theorem_iv_spread() {
        let empty = SubsetColoring::new();
        let v = theorem_iv_check(&empty, &IndexSet::new(vec![1, 2]), 2).unwrap();
        assert!(!v.holds && !v.spread_ok);
        let mut f = SubsetColoring::new();
        f.insert(vec![1, 3], 0);
        let v = theorem_iv_check(&f, &IndexSet::new(vec![1, 3]), 2).unwrap();
        assert!(v.spread_ok && v.holds);
        // constant F on a doubling-spread E
        let mut g = SubsetColoring::new();
        for s in IndexSet::new(vec![1, 3, 10, 2000]).k_subsets(2) {
            g.insert(s.elements().to_vec(), 0);
        }
        let v = theorem_iv_check(&g, &IndexSet::new(vec![1, 3, 10, 2000]), 2).unwrap();
        assert!(v.holds);
    }

    #[test]
    fn pow2_guard_is_overflow_safe() {
        assert!(!pow2_less(64, u64::MAX));
        assert!(!pow2_less(200, u64::MAX));
        assert!(pow2_less(3, 9));
        assert!(!pow2_less(3, 8));
    }

    #[test]
    fn threshold_trivial_case() {
        let r = threshold_h(ThresholdStatement::Zero4, 1, 1, 1, 1).unwrap();
        assert_eq!(r.rows.len(), 1);
        assert!(r.rows[0].holds);
        assert_eq!(r.least_confirmed, Some(1));
    }

    #[test]
    fn threshold_04_small_table() {
        let r = threshold_h(ThresholdStatement::Zero4, 1, 1, 2, 4).unwrap();
        // n = 1 lacks a 2-element E; beyond that the bound (1)·2 = 2 must be
        // met by some pair
        assert!(!r.rows[0].holds);
        for row in &r.rows[1..] {
            assert!(row.holds, "expected hold at n={}", row.n);
        }
        assert_eq!(r.least_confirmed, Some(2));
    }

    #[test]
    fn threshold_i_holds_at_p() {
        let r = threshold_h(ThresholdStatement::TheoremI, 1, 1, 2, 3).unwrap();
        assert!(!r.rows[0].holds); // n = 1 < p
        assert!(r.rows[1].holds);
        assert!(r.rows[2].holds);
    }

    #[test]
    fn threshold_refuses_oversized_spaces() {
        assert!(matches!(
            threshold_h(ThresholdStatement::Zero4, 2, 1, 2, 5),
            Err(Error::Budget { .. })
        ));
    }
}
