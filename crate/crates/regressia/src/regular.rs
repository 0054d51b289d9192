//! Regressive regularity, j-relatedness, (t, r)-regularity, sets of
//! indiscernibles, and the search for regular recursion outputs.

use std::collections::BTreeSet;

use rand::{seq::SliceRandom, Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use crate::bef::BefFormula;
use crate::closure::is_closed;
use crate::dfnl::{df, rcn, Dfnl};
use crate::error::{Error, Result};
use crate::order_type::{order_type, ot, same_order_type};
use crate::tuple::{IndexSet, ScalarMap, Tuple, TupleMap, TupleSet, Value};
use crate::witness::{SearchBudget, SearchReport, SearchStrategy, Witness};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RegularityVerdict {
    pub holds: bool,
    /// A domain point of E^k missing from dom(f): the clause (i) failure,
    /// reported distinctly from a value disagreement.
    pub missing: Option<Tuple>,
    /// Same-order-type points violating clause (ii).
    pub counterexample: Option<(Tuple, Tuple)>,
}

impl RegularityVerdict {
    fn ok() -> Self {
        RegularityVerdict {
            holds: true,
            missing: None,
            counterexample: None,
        }
    }
}

/// f is regressively regular over E: E^k ⊆ dom(f), and same-order-type
/// points with a regressive value agree exactly.
pub fn is_regressively_regular(f: &TupleMap, e: &IndexSet, k: usize) -> RegularityVerdict {
    let pts: Vec<Tuple> = e.power(k).iter().cloned().collect();
    for x in &pts {
        if f.get(x).is_none() {
            return RegularityVerdict {
                holds: false,
                missing: Some(x.clone()),
                counterexample: None,
            };
        }
    }
    for x in &pts {
        let fx = f.get(x).unwrap();
        if fx.sup() >= x.min_coord() {
            continue;
        }
        for y in &pts {
            if !same_order_type(x, y) {
                continue;
            }
            let fy = f.get(y).unwrap();
            if fy.sup() >= y.min_coord() || fx != fy {
                return RegularityVerdict {
                    holds: false,
                    missing: None,
                    counterexample: Some((x.clone(), y.clone())),
                };
            }
        }
    }
    RegularityVerdict::ok()
}

/// Scalar-valued variant, for recursion outputs.
pub fn is_regressively_regular_scalar(
    f: &ScalarMap,
    e: &IndexSet,
    k: usize,
) -> RegularityVerdict {
    let mut m = TupleMap::new();
    for (key, v) in f {
        m.insert(key.clone(), Value::Scalar(*v));
    }
    is_regressively_regular(&m, e, k)
}

/// x and y are j-related: same order type; coordinates at most j are
/// identical; coordinates above j in x sit above |x| in y.
pub fn j_related(x: &Tuple, y: &Tuple, j: u64) -> bool {
    if x.arity() != y.arity() || !same_order_type(x, y) {
        return false;
    }
    let sup = x.sup();
    x.coords().iter().zip(y.coords()).all(|(&xi, &yi)| {
        if xi <= j {
            yi == xi
        } else {
            yi > sup
        }
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IndiscernibilityVerdict {
    pub holds: bool,
    /// The violating formula (canonical text) and the argument tuple.
    pub counterexample: Option<(String, serde_json::Value)>,
}

impl IndiscernibilityVerdict {
    fn ok() -> Self {
        IndiscernibilityVerdict {
            holds: true,
            counterexample: None,
        }
    }
}

fn fld_tuples(fld: &[u64], t: usize) -> Vec<Vec<u64>> {
    let mut out = vec![vec![]];
    for _ in 0..t {
        out = out
            .into_iter()
            .flat_map(|v| {
                fld.iter().map(move |&c| {
                    let mut w = v.clone();
                    w.push(c);
                    w
                })
            })
            .collect();
    }
    out
}

fn check_shared_clauses(f: &ScalarMap, a: &TupleSet, e: &IndexSet, t: usize) -> Result<()> {
    let r = a.arity();
    if t == 0 || r == 0 {
        return Err(Error::Precondition("t and r must be positive".into()));
    }
    if !is_closed(a) {
        let (missing, member) = crate::closure::closedness_witness(a).unwrap();
        return Err(Error::NotClosed(missing, member));
    }
    for key in f.keys() {
        if !a.contains(key) {
            return Err(Error::Precondition(format!(
                "f is defined at {key} outside A"
            )));
        }
    }
    // the membership clause: tuples over E lie in A
    for x in e.power(r).iter() {
        if !a.contains(x) {
            return Err(Error::Precondition(format!(
                "E^r is not contained in A: {x} missing"
            )));
        }
    }
    Ok(())
}

/// (t, r)-regularity over E, quantified over the supplied BEF(2t, t, r)
/// formulas: every satisfied C(x, u) with |u| < min(x) admits a uniform
/// witness w working for all same-order-type y.
pub fn tr_regular_check(
    f: &ScalarMap,
    a: &TupleSet,
    e: &IndexSet,
    t: usize,
    formulas: &[BefFormula],
) -> Result<IndiscernibilityVerdict> {
    let r = a.arity();
    check_shared_clauses(f, a, e, t)?;
    for c in formulas {
        if c.q != 2 * t || c.t != t || c.r != r {
            return Err(Error::Precondition(format!(
                "formula shape ({}, {}, {}) does not match BEF({}, {t}, {r})",
                c.q,
                c.t,
                c.r,
                2 * t
            )));
        }
    }
    let fld: Vec<u64> = a.field().into_iter().collect();
    let xs: Vec<Tuple> = e.power(t).iter().cloned().collect();
    let us = fld_tuples(&fld, t);
    for c in formulas {
        for x in &xs {
            let minx = x.min_coord();
            for u in &us {
                if u.iter().copied().max().unwrap_or(0) >= minx {
                    continue;
                }
                let mut args = x.coords().to_vec();
                args.extend(u.iter().copied());
                if !c.eval(f, &args) {
                    continue;
                }
                // some w must work uniformly across the order-type class
                let class: Vec<&Tuple> =
                    xs.iter().filter(|y| same_order_type(x, y)).collect();
                let found = us.iter().any(|w| {
                    class.iter().all(|y| {
                        let mut a2 = y.coords().to_vec();
                        a2.extend(w.iter().copied());
                        c.eval(f, &a2)
                    })
                });
                if !found {
                    return Ok(IndiscernibilityVerdict {
                        holds: false,
                        counterexample: Some((
                            c.to_string(),
                            json!({ "x": x.coords(), "u": u }),
                        )),
                    });
                }
            }
        }
    }
    Ok(IndiscernibilityVerdict::ok())
}

/// E as a (t, r)-SOI for f, quantified over the supplied BEF(3t, t, r)
/// formulas: C(x, z, w) and C(y, z, w) agree whenever x, y share an order
/// type, z comes from E^t, w from f[E^r]^t, and |z, w| < min(x, y).
pub fn soi_check(
    f: &ScalarMap,
    a: &TupleSet,
    e: &IndexSet,
    t: usize,
    formulas: &[BefFormula],
) -> Result<IndiscernibilityVerdict> {
    let r = a.arity();
    check_shared_clauses(f, a, e, t)?;
    for c in formulas {
        if c.q != 3 * t || c.t != t || c.r != r {
            return Err(Error::Precondition(format!(
                "formula shape ({}, {}, {}) does not match BEF({}, {t}, {r})",
                c.q,
                c.t,
                c.r,
                3 * t
            )));
        }
    }
    let xs: Vec<Tuple> = e.power(t).iter().cloned().collect();
    // f[E^r]: values attained on tuples over E
    let mut image: BTreeSet<u64> = BTreeSet::new();
    for x in e.power(r).iter() {
        if let Some(v) = f.get(x) {
            image.insert(*v);
        }
    }
    let img: Vec<u64> = image.into_iter().collect();
    let ws = fld_tuples(&img, t);
    for c in formulas {
        for x in &xs {
            for y in &xs {
                if !same_order_type(x, y) || x == y {
                    continue;
                }
                let bound = x.min_coord().min(y.min_coord());
                for z in &xs {
                    if z.sup() >= bound {
                        continue;
                    }
                    for w in &ws {
                        if w.iter().copied().max().unwrap_or(0) >= bound {
                            continue;
                        }
                        let eval_at = |head: &Tuple| {
                            let mut args = head.coords().to_vec();
                            args.extend(z.coords().iter().copied());
                            args.extend(w.iter().copied());
                            c.eval(f, &args)
                        };
                        if eval_at(x) != eval_at(y) {
                            return Ok(IndiscernibilityVerdict {
                                holds: false,
                                counterexample: Some((
                                    c.to_string(),
                                    json!({
                                        "x": x.coords(),
                                        "y": y.coords(),
                                        "z": z.coords(),
                                        "w": w,
                                    }),
                                )),
                            });
                        }
                    }
                }
            }
        }
    }
    Ok(IndiscernibilityVerdict::ok())
}

/// What a regular search runs its recursion through.
#[derive(Clone, Debug)]
pub enum RegularSource {
    Functional(Dfnl),
    Formula(BefFormula),
}

impl RegularSource {
    fn compute(&self, a: &TupleSet) -> Result<ScalarMap> {
        match self {
            RegularSource::Functional(h) => rcn(a, h),
            RegularSource::Formula(b) => df(b, a),
        }
    }

    fn statement(&self) -> &'static str {
        match self {
            RegularSource::Functional(_) => "lemma-5.2",
            RegularSource::Formula(_) => "lemma-5.3",
        }
    }
}

/// Coordinate range that closure-generated carriers are drawn from.
pub const REGULAR_SEARCH_COORD_RANGE: u64 = 10;

/// Search closed carriers A = S^k and subsets E ⊆ S of size p for which the
/// recursion output is regressively regular over E. Witnesses are
/// re-verified through the public checker; exhaustion of the budget is
/// inconclusive, never a refutation.
pub fn search_regular(
    source: &RegularSource,
    k: usize,
    p: usize,
    budget: &SearchBudget,
) -> Result<SearchReport> {
    let base = IndexSet::range(REGULAR_SEARCH_COORD_RANGE);
    let mut explored = 0u64;
    let mut witness: Option<(TupleSet, IndexSet, u64)> = None;

    let consider = |s: &IndexSet, explored: &mut u64| -> Result<Option<(TupleSet, IndexSet, u64)>> {
        let a = s.power(k);
        let f = source.compute(&a)?;
        let mut fmap = TupleMap::new();
        for (key, v) in &f {
            fmap.insert(key.clone(), Value::Scalar(*v));
        }
        for e in s.k_subsets(p) {
            *explored += 1;
            if regular_inline(&f, &e, k) {
                // re-verify through the public checker before trusting it
                let verdict = is_regressively_regular(&fmap, &e, k);
                if verdict.holds {
                    let count = count_regressive(&f, &e, k);
                    return Ok(Some((a, e, count)));
                }
            }
        }
        Ok(None)
    };

    match budget.strategy {
        SearchStrategy::Exhaustive | SearchStrategy::GreedyRamsey => {
            'outer: for size in p..=base.len() {
                for s in base.k_subsets(size) {
                    if explored >= budget.max_candidates {
                        break 'outer;
                    }
                    if let Some(w) = consider(&s, &mut explored)? {
                        witness = Some(w);
                        break 'outer;
                    }
                }
            }
        }
        SearchStrategy::RandomRestart => {
            let mut rng = ChaCha8Rng::seed_from_u64(budget.seed);
            let pool: Vec<u64> = base.elements().to_vec();
            while explored < budget.max_candidates && witness.is_none() {
                let size = rng.gen_range(p..=pool.len());
                let mut s: Vec<u64> =
                    pool.choose_multiple(&mut rng, size).copied().collect();
                s.sort_unstable();
                witness = consider(&IndexSet::new(s), &mut explored)?;
            }
        }
    }

    let target = ot(k)?;
    let mut report = SearchReport {
        statement: source.statement().into(),
        params: json!({ "k": k, "p": p }),
        witness: None,
        count: 0,
        target,
        verified: false,
        explored,
        seed: budget.seed,
        vacuous: false,
    };
    if let Some((a, e, count)) = witness {
        report.count = count;
        report.verified = count <= target;
        report.witness = Some(Witness { a: Some(a), e });
    }
    Ok(report)
}

/// Search-side regularity decision, kept separate from the public checker
/// so a witness is only reported when both agree.
fn regular_inline(f: &ScalarMap, e: &IndexSet, k: usize) -> bool {
    let pts: Vec<Tuple> = e.power(k).iter().cloned().collect();
    let mut per_type: std::collections::BTreeMap<Vec<u64>, Option<u64>> =
        std::collections::BTreeMap::new();
    for x in &pts {
        let v = match f.get(x) {
            Some(v) => *v,
            None => return false,
        };
        let class = order_type(x).0;
        let entry = if v < x.min_coord() { Some(v) } else { None };
        match per_type.get(&class) {
            None => {
                per_type.insert(class, entry);
            }
            Some(prev) if *prev != entry => return false,
            _ => {}
        }
    }
    true
}

fn count_regressive(f: &ScalarMap, e: &IndexSet, k: usize) -> u64 {
    let mut vals = BTreeSet::new();
    for x in e.power(k).iter() {
        if let Some(&v) = f.get(x) {
            if v < x.min_coord() {
                vals.insert(v);
            }
        }
    }
    vals.len() as u64
}
