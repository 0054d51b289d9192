//! Uniformity, order invariance, transfer between grounds, and the greedy
//! direct-completion engine.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::assignment::{Endomorphism, FunctionAssignment, Rule};
use crate::decreasing::{Counterexample, PairScope, PropertyVerdict};
use crate::error::{Error, Result};
use crate::tuple::{IndexSet, Tuple, TupleSet};

/// Largest S for which a restriction code is computed: the powerset of S^k
/// is enumerated.
pub const RESTRICTION_POINT_CAP: usize = 16;
/// Largest ground for which exhaustive order-isomorphic pair scopes and
/// greedy completions are built.
pub const ORDER_INVARIANCE_GROUND_CAP: usize = 9;
pub const COMPLETION_GROUND_CAP: usize = 16;

/// An index-translated description of a restriction of an assignment:
/// structural equality coincides with order isomorphism.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct RestrictionCode {
    pub size: usize,
    pub endo_codes: BTreeSet<Vec<(Vec<usize>, Vec<usize>)>>,
}

fn positions(t: &Tuple, field: &[u64]) -> Vec<usize> {
    t.coords()
        .iter()
        .map(|c| field.binary_search(c).expect("coordinate in field"))
        .collect()
}

/// Index-translate a graph against the sorted field of its own coordinates.
fn graph_code(graph: &BTreeMap<Tuple, Tuple>) -> Vec<(Vec<usize>, Vec<usize>)> {
    let mut field: BTreeSet<u64> = BTreeSet::new();
    for (k, v) in graph {
        field.extend(k.coords().iter().copied());
        field.extend(v.coords().iter().copied());
    }
    let field: Vec<u64> = field.into_iter().collect();
    graph
        .iter()
        .map(|(k, v)| (positions(k, &field), positions(v, &field)))
        .collect()
}

/// The restriction of U to tuples over S, described purely by indices into
/// the increasing enumeration of S.
pub fn restriction_code(u: &FunctionAssignment, s: &IndexSet) -> Result<RestrictionCode> {
    let fld = u.ground.field();
    for &v in s.elements() {
        if !fld.contains(&v) {
            return Err(Error::Precondition(format!(
                "{v} is not in the assignment's field"
            )));
        }
    }
    let points = s.power(u.arity);
    let mut admissible = TupleSet::empty(u.arity);
    for x in points.iter() {
        if u.ground.contains(x) {
            admissible.insert(x.clone())?;
        }
    }
    if admissible.len() > RESTRICTION_POINT_CAP {
        return Err(Error::Budget {
            task: "restriction code",
            needed: 1u128 << admissible.len().min(127),
            cap: 1u128 << RESTRICTION_POINT_CAP,
        });
    }
    let mut endo_codes = BTreeSet::new();
    for a in admissible.subsets() {
        let endo = u.apply(&a)?;
        let code = endo
            .graph()
            .iter()
            .map(|(k, v)| (positions(k, s.elements()), positions(v, s.elements())))
            .collect();
        endo_codes.insert(code);
    }
    Ok(RestrictionCode {
        size: s.len(),
        endo_codes,
    })
}

fn field_of(a: &TupleSet) -> Vec<u64> {
    a.field().into_iter().collect()
}

/// The increasing bijection between two equal-sized fields, if the tuple
/// sets correspond under it.
fn order_iso(a: &TupleSet, b: &TupleSet) -> Option<BTreeMap<u64, u64>> {
    let fa = field_of(a);
    let fb = field_of(b);
    if fa.len() != fb.len() || a.len() != b.len() {
        return None;
    }
    let map: BTreeMap<u64, u64> = fa.iter().copied().zip(fb.iter().copied()).collect();
    for x in a.iter() {
        let y = Tuple::new(x.coords().iter().map(|c| map[c]).collect());
        if !b.contains(&y) {
            return None;
        }
    }
    Some(map)
}

fn translate(t: &Tuple, map: &BTreeMap<u64, u64>) -> Tuple {
    Tuple::new(t.coords().iter().map(|c| map[c]).collect())
}

/// All ordered order-isomorphic pairs of subsets of the ground.
pub fn order_iso_scope_exhaustive(ground: &TupleSet) -> Result<PairScope> {
    if ground.len() > ORDER_INVARIANCE_GROUND_CAP {
        return Err(Error::Budget {
            task: "exhaustive order-invariance scope",
            needed: 1u128 << (2 * ground.len()).min(127),
            cap: 1u128 << (2 * ORDER_INVARIANCE_GROUND_CAP),
        });
    }
    let subs: Vec<TupleSet> = ground.subsets().collect();
    let mut out = Vec::new();
    for a in &subs {
        for b in &subs {
            if order_iso(a, b).is_some() {
                out.push((a.clone(), b.clone()));
            }
        }
    }
    Ok(PairScope(out))
}

/// Order-isomorphic inputs must give order-isomorphic outputs under the
/// same field bijection.
pub fn is_order_invariant(u: &FunctionAssignment, scope: &PairScope) -> Result<PropertyVerdict> {
    for (a, b) in &scope.0 {
        let map = order_iso(a, b).ok_or_else(|| {
            Error::Precondition("order-invariance scope pair is not order isomorphic".into())
        })?;
        let fa = u.apply(a)?;
        let fb = u.apply(b)?;
        let moved: BTreeMap<Tuple, Tuple> = fa
            .graph()
            .iter()
            .map(|(k, v)| (translate(k, &map), translate(v, &map)))
            .collect();
        if &moved != fb.graph() {
            return Ok(PropertyVerdict {
                holds: false,
                counterexample: Some(Counterexample::Pair {
                    a: a.clone(),
                    b: b.clone(),
                    x: None,
                }),
            });
        }
    }
    Ok(PropertyVerdict {
        holds: true,
        counterexample: None,
    })
}

/// Find E inside the assignment's field on which all same-size subsets of
/// size ≤ p share a restriction code, and induce the assignment on [m]
/// through the first m elements of E. None when no such E exists at this
/// field size.
pub fn uniformize(
    u: &FunctionAssignment,
    p: usize,
    m: usize,
) -> Result<Option<(IndexSet, FunctionAssignment)>> {
    let fld: Vec<u64> = u.ground.field().into_iter().collect();
    let n = fld.len();
    if n >= 64 {
        return Err(Error::Budget {
            task: "uniformize candidate enumeration",
            needed: u128::MAX,
            cap: 1 << 63,
        });
    }
    let base = IndexSet::new(fld);
    // larger E first; lexicographically least within a size
    for size in (m..=n).rev() {
        'cand: for e in base.k_subsets(size) {
            for q in 1..=p.min(size) {
                let mut code: Option<RestrictionCode> = None;
                for s in e.k_subsets(q) {
                    let c = restriction_code(u, &s)?;
                    match &code {
                        None => code = Some(c),
                        Some(c0) if *c0 != c => continue 'cand,
                        _ => {}
                    }
                }
            }
            let v = induce_on_prefix(u, &e, m)?;
            return Ok(Some((e, v)));
        }
    }
    Ok(None)
}

/// The table assignment on ground [m]^k obtained by pulling U back through
/// the increasing injection of [m] onto the first m elements of E.
fn induce_on_prefix(u: &FunctionAssignment, e: &IndexSet, m: usize) -> Result<FunctionAssignment> {
    let k = u.arity;
    let small: BTreeSet<u64> = (0..m as u64).collect();
    let ground_m = TupleSet::cartesian_power(&small, k);
    let fwd: BTreeMap<u64, u64> = (0..m as u64).map(|i| (i, e.nth(i as usize + 1))).collect();
    let back: BTreeMap<u64, u64> = fwd.iter().map(|(a, b)| (*b, *a)).collect();
    let mut table = BTreeMap::new();
    for a in ground_m.subsets() {
        let b = TupleSet::new(k, a.iter().map(|x| translate(x, &fwd)))?;
        let ub = u.apply(&b)?;
        let graph: BTreeMap<Tuple, Tuple> = ub
            .graph()
            .iter()
            .map(|(x, y)| (translate(x, &back), translate(y, &back)))
            .collect();
        table.insert(a.clone(), Endomorphism::new(a, graph)?);
    }
    FunctionAssignment::new(k, ground_m, Rule::Table(table))
}

/// Transfer an order-invariant assignment to the ground [m]^k. The pullback
/// is computed through two distinct embeddings of [m] into the field; any
/// disagreement is a visible invariance failure, not a silent choice.
pub fn transfer(u: &FunctionAssignment, m: usize) -> Result<FunctionAssignment> {
    let k = u.arity;
    let fld: Vec<u64> = u.ground.field().into_iter().collect();
    if m > fld.len() {
        return Err(Error::Precondition(format!(
            "target size {m} exceeds the field size {}",
            fld.len()
        )));
    }
    if u.ground.len() != fld.len().pow(k as u32) {
        return Err(Error::Precondition(
            "transfer requires a full-power ground".into(),
        ));
    }
    let small: BTreeSet<u64> = (0..m as u64).collect();
    let ground_m = TupleSet::cartesian_power(&small, k);
    let lo: BTreeMap<u64, u64> = (0..m).map(|i| (i as u64, fld[i])).collect();
    let hi: BTreeMap<u64, u64> = (0..m).map(|i| (i as u64, fld[fld.len() - m + i])).collect();
    let lo_back: BTreeMap<u64, u64> = lo.iter().map(|(a, b)| (*b, *a)).collect();
    let hi_back: BTreeMap<u64, u64> = hi.iter().map(|(a, b)| (*b, *a)).collect();
    let mut table = BTreeMap::new();
    for a in ground_m.subsets() {
        let pull = |fwd: &BTreeMap<u64, u64>, back: &BTreeMap<u64, u64>| -> Result<BTreeMap<Tuple, Tuple>> {
            let b = TupleSet::new(k, a.iter().map(|x| translate(x, fwd)))?;
            let ub = u.apply(&b)?;
            Ok(ub
                .graph()
                .iter()
                .map(|(x, y)| (translate(x, back), translate(y, back)))
                .collect())
        };
        let g1 = pull(&lo, &lo_back)?;
        let g2 = pull(&hi, &hi_back)?;
        if g1 != g2 {
            return Err(Error::NotOrderInvariant);
        }
        table.insert(a.clone(), Endomorphism::new(a.clone(), g1)?);
    }
    FunctionAssignment::new(k, ground_m, Rule::Table(table))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Tiebreak {
    LexLeast,
    LexGreatest,
}

/// Greedy direct completion on the assignment's own ground: repeatedly
/// extend a partial map at a sup-minimal missing point with a sup-minimal
/// candidate value U(A ∪ {x})(x), over the A ⊆ dom(f) with U(A) ⊆ f.
pub fn direct_completion_greedy(
    u: &FunctionAssignment,
    policy: Tiebreak,
) -> Result<Endomorphism> {
    let ground = &u.ground;
    if ground.len() > COMPLETION_GROUND_CAP {
        return Err(Error::Budget {
            task: "greedy direct completion",
            needed: 1u128 << ground.len().min(127),
            cap: 1u128 << COMPLETION_GROUND_CAP,
        });
    }
    let mut f: BTreeMap<Tuple, Tuple> = BTreeMap::new();
    while f.len() < ground.len() {
        let x = ground
            .iter()
            .filter(|t| !f.contains_key(*t))
            .min_by_key(|t| (t.sup(), (*t).clone()))
            .unwrap()
            .clone();
        let dom = TupleSet::new(ground.arity(), f.keys().cloned())?;
        let mut candidates: BTreeSet<Tuple> = BTreeSet::new();
        for a in dom.subsets() {
            let ua = u.apply(&a)?;
            let agrees = ua.graph().iter().all(|(k, v)| f.get(k) == Some(v));
            if !agrees {
                continue;
            }
            let ext = u.apply(&a.with(x.clone()))?;
            candidates.insert(ext.apply(&x)?.clone());
        }
        if candidates.is_empty() {
            return Err(Error::Precondition(format!(
                "empty candidate set at {x}: the assignment is not #-decreasing on this ground"
            )));
        }
        let min_sup = candidates.iter().map(|c| c.sup()).min().unwrap();
        let pool: Vec<&Tuple> = candidates.iter().filter(|c| c.sup() == min_sup).collect();
        let pick = match policy {
            Tiebreak::LexLeast => pool
                .iter()
                .copied()
                .min_by(|a, b| lex_cmp(a, b))
                .unwrap(),
            Tiebreak::LexGreatest => pool
                .iter()
                .copied()
                .max_by(|a, b| lex_cmp(a, b))
                .unwrap(),
        };
        f.insert(x, pick.clone());
    }
    Endomorphism::new(ground.clone(), f)
}

fn lex_cmp(a: &Tuple, b: &Tuple) -> std::cmp::Ordering {
    if a.lex_lt(b) {
        std::cmp::Ordering::Less
    } else if b.lex_lt(a) {
        std::cmp::Ordering::Greater
    } else {
        std::cmp::Ordering::Equal
    }
}

/// The "special" invariant of an intermediate partial map: sup-downward
/// closed domain, and every A ⊆ dom(f) extends to some B with U(B) ⊆ f.
pub fn is_special(u: &FunctionAssignment, f: &BTreeMap<Tuple, Tuple>) -> Result<bool> {
    let ground = &u.ground;
    let dom = TupleSet::new(ground.arity(), f.keys().cloned())?;
    for y in dom.iter() {
        for x in ground.iter() {
            if x.sup() < y.sup() && !dom.contains(x) {
                return Ok(false);
            }
        }
    }
    if dom.len() > 12 {
        return Err(Error::Budget {
            task: "special-invariant check",
            needed: 1u128 << dom.len().min(127),
            cap: 1 << 12,
        });
    }
    for a in dom.subsets() {
        let mut found = false;
        for b in ground.subsets() {
            if !a.is_subset(&b) {
                continue;
            }
            let ub = u.apply(&b)?;
            if ub.graph().iter().all(|(k, v)| f.get(k) == Some(v)) {
                found = true;
                break;
            }
        }
        if !found {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CompletionVerdict {
    pub holds: bool,
    /// A B ⊆ Y^k admitting no C with f|C order isomorphic to any U(A).
    pub counterexample: Option<TupleSet>,
}

/// Whether every B ⊆ Y^k sits inside some C with f|C order isomorphic to
/// some U(A). On a finite carrier this reduces to the single check at
/// C = Y^k: that C is the only superset of B = Y^k, and covers every
/// smaller B when it succeeds.
pub fn is_completion(f: &Endomorphism, u: &FunctionAssignment) -> Result<CompletionVerdict> {
    let carrier = f.carrier();
    if carrier.len() > COMPLETION_GROUND_CAP {
        return Err(Error::Budget {
            task: "completion check",
            needed: 1u128 << carrier.len().min(127),
            cap: 1u128 << COMPLETION_GROUND_CAP,
        });
    }
    let shapes: BTreeSet<Vec<(Vec<usize>, Vec<usize>)>> = u
        .ground
        .subsets()
        .map(|a| u.apply(&a).map(|e| graph_code(e.graph())))
        .collect::<Result<_>>()?;
    let full_code = graph_code(f.graph());
    if shapes.contains(&full_code) {
        return Ok(CompletionVerdict {
            holds: true,
            counterexample: None,
        });
    }
    // the whole carrier fails; prefer reporting a singleton B that already
    // admits no completing C, if one exists
    for x in carrier.iter() {
        let mut rescued = false;
        for c in carrier.subsets() {
            if !c.contains(x) {
                continue;
            }
            let sub: BTreeMap<Tuple, Tuple> = c
                .iter()
                .map(|t| (t.clone(), f.apply(t).unwrap().clone()))
                .collect();
            if shapes.contains(&graph_code(&sub)) {
                rescued = true;
                break;
            }
        }
        if !rescued {
            return Ok(CompletionVerdict {
                holds: false,
                counterexample: Some(TupleSet::new(carrier.arity(), [x.clone()])?),
            });
        }
    }
    Ok(CompletionVerdict {
        holds: false,
        counterexample: Some(carrier.clone()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tuple::Tuple;

    fn ground1(n: u64) -> TupleSet {
        TupleSet::new(1, (0..n).map(Tuple::scalar)).unwrap()
    }

    fn identity_on(n: u64) -> FunctionAssignment {
        FunctionAssignment::new(1, ground1(n), Rule::Identity).unwrap()
    }

    /// Identity everywhere except one subset, breaking order invariance.
    fn perturbed_table(n: u64) -> FunctionAssignment {
        let g = ground1(n);
        let mut table = BTreeMap::new();
        for a in g.subsets() {
            let special = a.len() == 2 && a.contains(&Tuple::scalar(0)) && a.contains(&Tuple::scalar(1));
            let mut graph: BTreeMap<Tuple, Tuple> =
                a.iter().map(|x| (x.clone(), x.clone())).collect();
            if special {
                graph.insert(Tuple::scalar(1), Tuple::scalar(0));
            }
            table.insert(a.clone(), Endomorphism::new(a, graph).unwrap());
        }
        FunctionAssignment::new(1, g, Rule::Table(table)).unwrap()
    }

    #[test]
    fn identity_codes_agree_across_subsets() {
        let u = identity_on(5);
        let c1 = restriction_code(&u, &IndexSet::new(vec![0, 2])).unwrap();
        let c2 = restriction_code(&u, &IndexSet::new(vec![1, 4])).unwrap();
        assert_eq!(c1, c2);
    }

    #[test]
    fn perturbed_table_has_two_codes_at_size_two() {
        let u = perturbed_table(4);
        let c1 = restriction_code(&u, &IndexSet::new(vec![0, 1])).unwrap();
        let c2 = restriction_code(&u, &IndexSet::new(vec![2, 3])).unwrap();
        assert_ne!(c1, c2);
    }

    #[test]
    fn identity_and_min_collapse_are_order_invariant() {
        for rule in [Rule::Identity, Rule::MinCollapse] {
            let u = FunctionAssignment::new(1, ground1(5), rule).unwrap();
            let scope = order_iso_scope_exhaustive(&u.ground).unwrap();
            assert!(is_order_invariant(&u, &scope).unwrap().holds);
        }
    }

    #[test]
    fn perturbed_table_is_not_order_invariant() {
        let u = perturbed_table(4);
        let scope = order_iso_scope_exhaustive(&u.ground).unwrap();
        let v = is_order_invariant(&u, &scope).unwrap();
        assert!(!v.holds);
        assert!(v.counterexample.is_some());
    }

    #[test]
    fn uniformity_by_codes_matches_order_invariance() {
        // Lemma 4.5 on small instances: equal codes per size ⟺ invariance
        for u in [identity_on(4), perturbed_table(4)] {
            let scope = order_iso_scope_exhaustive(&u.ground).unwrap();
            let invariant = is_order_invariant(&u, &scope).unwrap().holds;
            let base = IndexSet::new(field_of(&u.ground));
            let mut uniform = true;
            for q in 1..=2usize {
                let mut code = None;
                for s in base.k_subsets(q) {
                    let c = restriction_code(&u, &s).unwrap();
                    match &code {
                        None => code = Some(c),
                        Some(c0) => {
                            if *c0 != c {
                                uniform = false;
                            }
                        }
                    }
                }
            }
            assert_eq!(invariant, uniform);
        }
    }

    #[test]
    fn uniformize_identity_returns_everything() {
        let u = identity_on(5);
        let (e, v) = uniformize(&u, 2, 3).unwrap().unwrap();
        assert_eq!(e.elements(), &[0, 1, 2, 3, 4]);
        let scope = order_iso_scope_exhaustive(&v.ground).unwrap();
        assert!(is_order_invariant(&v, &scope).unwrap().holds);
    }

    #[test]
    fn uniformize_perturbed_drops_the_bad_pattern() {
        let u = perturbed_table(4);
        let out = uniformize(&u, 2, 2).unwrap();
        if let Some((e, v)) = out {
            // uniform subsets avoid mixing {0,1}-type and other pairs
            let scope = order_iso_scope_exhaustive(&v.ground).unwrap();
            assert!(is_order_invariant(&v, &scope).unwrap().holds);
            for q in 1..=2usize {
                let mut code = None;
                for s in e.k_subsets(q) {
                    let c = restriction_code(&u, &s).unwrap();
                    match &code {
                        None => code = Some(c),
                        Some(c0) => assert_eq!(c0, &c),
                    }
                }
            }
        }
    }

    #[test]
    fn transfer_min_collapse_scales_up_and_down() {
        let u = FunctionAssignment::new(1, ground1(5), Rule::MinCollapse).unwrap();
        let v = transfer(&u, 3).unwrap();
        let w = FunctionAssignment::new(1, ground1(3), Rule::MinCollapse).unwrap();
        for a in v.ground.clone().subsets() {
            assert_eq!(v.apply(&a).unwrap(), w.apply(&a).unwrap());
        }
    }

    #[test]
    fn transfer_refuses_non_invariant_assignments() {
        let u = perturbed_table(4);
        assert!(matches!(transfer(&u, 3), Err(Error::NotOrderInvariant)));
    }

    #[test]
    fn transfer_round_trip_is_identity() {
        let u = FunctionAssignment::new(1, ground1(4), Rule::MinCollapse).unwrap();
        let v = transfer(&u, 4).unwrap();
        for a in u.ground.clone().subsets() {
            assert_eq!(v.apply(&a).unwrap(), u.apply(&a).unwrap());
        }
    }

    #[test]
    fn greedy_completion_of_identity_is_identity() {
        let u = identity_on(3);
        let e = direct_completion_greedy(&u, Tiebreak::LexLeast).unwrap();
        assert_eq!(e, Endomorphism::identity(u.ground.clone()));
    }

    #[test]
    fn greedy_completion_equals_full_application() {
        let u = FunctionAssignment::new(1, ground1(4), Rule::MinCollapse).unwrap();
        let full = u.apply(&u.ground).unwrap();
        for policy in [Tiebreak::LexLeast, Tiebreak::LexGreatest] {
            let e = direct_completion_greedy(&u, policy).unwrap();
            assert_eq!(e, full);
        }
    }

    #[test]
    fn greedy_intermediate_states_are_special() {
        // replay the greedy loop on a micro instance, checking the invariant
        let u = FunctionAssignment::new(1, ground1(3), Rule::MinCollapse).unwrap();
        let finished = direct_completion_greedy(&u, Tiebreak::LexLeast).unwrap();
        let mut partial: BTreeMap<Tuple, Tuple> = BTreeMap::new();
        let mut order: Vec<Tuple> = finished.graph().keys().cloned().collect();
        order.sort_by_key(|t| (t.sup(), t.clone()));
        for x in order {
            partial.insert(x.clone(), finished.apply(&x).unwrap().clone());
            assert!(is_special(&u, &partial).unwrap());
        }
    }

    #[test]
    fn completion_accepts_full_application() {
        let u = FunctionAssignment::new(1, ground1(3), Rule::MinCollapse).unwrap();
        let f = u.apply(&u.ground).unwrap();
        assert!(is_completion(&f, &u).unwrap().holds);
    }

    #[test]
    fn completion_rejects_a_shape_no_assignment_produces() {
        let u = identity_on(3);
        // a non-identity endomorphism can never restrict to identity shapes
        let carrier = ground1(3);
        let graph: BTreeMap<Tuple, Tuple> = carrier
            .iter()
            .map(|x| (x.clone(), Tuple::scalar(0)))
            .collect();
        let f = Endomorphism::new(carrier, graph).unwrap();
        let v = is_completion(&f, &u).unwrap();
        assert!(!v.holds);
        assert!(v.counterexample.is_some());
    }
}
