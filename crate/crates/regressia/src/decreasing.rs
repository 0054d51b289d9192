//! The #-decreasing / *-decreasing / end-preserving property checkers over
//! explicit scopes, together with the Ramsey reduction bounding regressive
//! values by the number of order types.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::assignment::FunctionAssignment;
use crate::error::{Error, Result};
use crate::order_type::{order_type, ot};
use crate::orders::StrictOrderSpec;
use crate::regressive::regressive_values;
use crate::tuple::{IndexSet, Tuple, TupleSet};

/// Largest ground for which default exhaustive (A, x) scopes are built.
pub const INSERTION_GROUND_CAP: usize = 12;
/// Largest ground for which default exhaustive (A, B) scopes are built.
pub const PAIR_GROUND_CAP: usize = 10;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Counterexample {
    /// A set and an inserted point violating the insertion condition.
    Insertion { a: TupleSet, x: Tuple },
    /// A pair of sets, with the point at which the condition fails.
    Pair {
        a: TupleSet,
        b: TupleSet,
        x: Option<Tuple>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PropertyVerdict {
    pub holds: bool,
    pub counterexample: Option<Counterexample>,
}

impl PropertyVerdict {
    fn holds() -> Self {
        PropertyVerdict {
            holds: true,
            counterexample: None,
        }
    }

    fn fails(c: Counterexample) -> Self {
        PropertyVerdict {
            holds: false,
            counterexample: Some(c),
        }
    }
}

/// The (A, x) pairs a sharp-decreasing check runs over.
#[derive(Clone, Debug)]
pub struct InsertionScope(pub Vec<(TupleSet, Tuple)>);

/// The (A, B) pairs a star-decreasing or end-preserving check runs over.
#[derive(Clone, Debug)]
pub struct PairScope(pub Vec<(TupleSet, TupleSet)>);

/// All A ⊆ ground with x ∈ ground \ A, in sorted order.
pub fn insertion_scope_exhaustive(ground: &TupleSet) -> Result<InsertionScope> {
    if ground.len() > INSERTION_GROUND_CAP {
        return Err(Error::Budget {
            task: "exhaustive insertion scope",
            needed: (ground.len() as u128) << ground.len().min(127),
            cap: (INSERTION_GROUND_CAP as u128) << INSERTION_GROUND_CAP,
        });
    }
    let mut out = Vec::new();
    for a in ground.subsets() {
        for x in ground.iter() {
            if !a.contains(x) {
                out.push((a.clone(), x.clone()));
            }
        }
    }
    Ok(InsertionScope(out))
}

/// All ordered pairs (A, B) of subsets of the ground.
pub fn pair_scope_exhaustive(ground: &TupleSet) -> Result<PairScope> {
    if ground.len() > PAIR_GROUND_CAP {
        return Err(Error::Budget {
            task: "exhaustive pair scope",
            needed: 1u128 << (2 * ground.len()).min(127),
            cap: 1u128 << (2 * PAIR_GROUND_CAP),
        });
    }
    let mut out = Vec::new();
    for a in ground.subsets() {
        for b in ground.subsets() {
            out.push((a.clone(), b.clone()));
        }
    }
    Ok(PairScope(out))
}

/// All (A, B) with A ⊆ B ⊆ ground and A downward closed in B under the
/// order: y ∈ B and y < x for some x ∈ A forces y ∈ A.
pub fn end_scope_exhaustive(ground: &TupleSet, o1: &StrictOrderSpec) -> Result<PairScope> {
    if ground.len() > PAIR_GROUND_CAP {
        return Err(Error::Budget {
            task: "exhaustive end-preservation scope",
            needed: 1u128 << (2 * ground.len()).min(127),
            cap: 1u128 << (2 * PAIR_GROUND_CAP),
        });
    }
    let mut out = Vec::new();
    for b in ground.subsets() {
        for a in b.subsets() {
            if downward_closed_in(&a, &b, o1) {
                out.push((a, b.clone()));
            }
        }
    }
    Ok(PairScope(out))
}

fn downward_closed_in(a: &TupleSet, b: &TupleSet, o1: &StrictOrderSpec) -> bool {
    a.iter()
        .all(|x| b.iter().all(|y| !o1.lt(y, x) || a.contains(y)))
}

fn random_subset(ground: &TupleSet, rng: &mut ChaCha8Rng) -> TupleSet {
    let mut a = TupleSet::empty(ground.arity());
    for x in ground.iter() {
        if rng.gen_bool(0.5) {
            a.insert(x.clone()).unwrap();
        }
    }
    a
}

/// Seeded sample of (A, x) pairs for grounds past the exhaustive cap.
pub fn insertion_scope_sampled(ground: &TupleSet, seed: u64, n: usize) -> InsertionScope {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let members: Vec<&Tuple> = ground.iter().collect();
    let mut out = Vec::new();
    while out.len() < n && !members.is_empty() {
        let a = random_subset(ground, &mut rng);
        let outside: Vec<&&Tuple> = members.iter().filter(|x| !a.contains(x)).collect();
        if outside.is_empty() {
            continue;
        }
        let x = (*outside[rng.gen_range(0..outside.len())]).clone();
        out.push((a, x));
    }
    InsertionScope(out)
}

/// Seeded sample of unrestricted (A, B) pairs.
pub fn pair_scope_sampled(ground: &TupleSet, seed: u64, n: usize) -> PairScope {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for _ in 0..n {
        out.push((random_subset(ground, &mut rng), random_subset(ground, &mut rng)));
    }
    PairScope(out)
}

/// Seeded sample of (A, B) with A downward closed in B: a random core is
/// closed downward inside B before use.
pub fn end_scope_sampled(
    ground: &TupleSet,
    o1: &StrictOrderSpec,
    seed: u64,
    n: usize,
) -> PairScope {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for _ in 0..n {
        let b = random_subset(ground, &mut rng);
        let mut a = TupleSet::empty(ground.arity());
        for x in b.iter() {
            if rng.gen_bool(0.5) {
                a.insert(x.clone()).unwrap();
            }
        }
        loop {
            let mut grew = false;
            for y in b.iter() {
                if !a.contains(y) && a.iter().any(|x| o1.lt(y, x)) {
                    a.insert(y.clone()).unwrap();
                    grew = true;
                }
            }
            if !grew {
                break;
            }
        }
        out.push((a, b));
    }
    PairScope(out)
}

/// For every (A, x) in scope: U(A) ⊆ U(A∪{x}) as graphs, or some y ∈ A has
/// x <₁ y and U(A∪{x})(y) <₂ U(A)(y).
pub fn check_sharp_decreasing(
    u: &FunctionAssignment,
    o1: &StrictOrderSpec,
    o2: &StrictOrderSpec,
    scope: &InsertionScope,
) -> Result<PropertyVerdict> {
    for (a, x) in &scope.0 {
        let small = u.apply(a)?;
        let big = u.apply(&a.with(x.clone()))?;
        if small.subgraph_of(&big) {
            continue;
        }
        let drops = a.iter().any(|y| {
            o1.lt(x, y) && o2.lt(big.apply(y).unwrap(), small.apply(y).unwrap())
        });
        if !drops {
            return Ok(PropertyVerdict::fails(Counterexample::Insertion {
                a: a.clone(),
                x: x.clone(),
            }));
        }
    }
    Ok(PropertyVerdict::holds())
}

/// For every (A, B) in scope and x ∈ A ∩ B: if U(A) and U(B) agree at every
/// y ∈ A with y <₁ x, then U(A)(x) = U(B)(x) or U(B)(x) <₂ U(A)(x).
pub fn check_star_decreasing(
    u: &FunctionAssignment,
    o1: &StrictOrderSpec,
    o2: &StrictOrderSpec,
    scope: &PairScope,
) -> Result<PropertyVerdict> {
    for (a, b) in &scope.0 {
        let fa = u.apply(a)?;
        let fb = u.apply(b)?;
        for x in a.iter() {
            if !b.contains(x) {
                continue;
            }
            let agree_below = a.iter().filter(|y| o1.lt(y, x)).all(|y| {
                b.contains(y) && fa.apply(y).unwrap() == fb.apply(y).unwrap()
            });
            if !agree_below {
                continue;
            }
            let va = fa.apply(x).unwrap();
            let vb = fb.apply(x).unwrap();
            if va != vb && !o2.lt(vb, va) {
                return Ok(PropertyVerdict::fails(Counterexample::Pair {
                    a: a.clone(),
                    b: b.clone(),
                    x: Some(x.clone()),
                }));
            }
        }
    }
    Ok(PropertyVerdict::holds())
}

/// For every (A, B) in scope with A downward closed in B: U(A) ⊆ U(B).
pub fn check_end_preserving(
    u: &FunctionAssignment,
    o1: &StrictOrderSpec,
    scope: &PairScope,
) -> Result<PropertyVerdict> {
    for (a, b) in &scope.0 {
        if !a.is_subset(b) || !downward_closed_in(a, b, o1) {
            return Err(Error::Precondition(
                "end-preservation scope pair is not downward closed".into(),
            ));
        }
        let fa = u.apply(a)?;
        let fb = u.apply(b)?;
        if !fa.subgraph_of(&fb) {
            return Ok(PropertyVerdict::fails(Counterexample::Pair {
                a: a.clone(),
                b: b.clone(),
                x: None,
            }));
        }
    }
    Ok(PropertyVerdict::holds())
}

/// The color a Ramsey reduction assigns to a point: the function value when
/// regressive, otherwise the fixed sentinel.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum ReduceColor {
    Val(Tuple),
    /// All values on E^k were regressive, so no in-band sentinel exists.
    Reserved,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RamseyReduceOutcome {
    /// The homogeneous-per-order-type p-subset, when one exists at this |E|.
    pub subset: Option<IndexSet>,
    /// Regressive values of U(A) on the returned subset's k-tuples.
    pub regressive_count: Option<usize>,
    /// The bound the reduction promises: the number of order types.
    pub ot_target: u64,
    /// The coarser k^k bound, reported alongside.
    pub kk_target: u64,
}

pub const RAMSEY_REDUCE_MAX_E: usize = 20;

/// Find E′ ⊆ E of size p on which x ↦ (order type, value-or-sentinel) is
/// constant per order type, so U(A) has at most ot(k) regressive values
/// on E′^k. Returns no subset when none exists at this |E| — the
/// underlying lemma needs |E| large relative to p.
pub fn ramsey_reduce(
    u: &FunctionAssignment,
    a: &TupleSet,
    e: &IndexSet,
    p: usize,
) -> Result<RamseyReduceOutcome> {
    let k = u.arity;
    if e.len() > RAMSEY_REDUCE_MAX_E {
        return Err(Error::Budget {
            task: "ramsey reduction",
            needed: e.len() as u128,
            cap: RAMSEY_REDUCE_MAX_E as u128,
        });
    }
    if e.len() < p {
        return Err(Error::Precondition(format!(
            "|E| = {} is smaller than p = {p}",
            e.len()
        )));
    }
    let ek = e.power(k);
    if !ek.is_subset(a) {
        let missing = ek.iter().find(|x| !a.contains(x)).unwrap();
        return Err(Error::Precondition(format!(
            "E^k is not contained in A: {missing} missing"
        )));
    }
    let endo = u.apply(a)?;

    // sentinel: lex-least non-regressive value on E^k, if any
    let mut sentinel: Option<Tuple> = None;
    for x in ek.iter() {
        let v = endo.apply(x)?;
        if v.sup() >= x.min_coord() {
            let better = match &sentinel {
                None => true,
                Some(s) => v.lex_lt(s),
            };
            if better {
                sentinel = Some(v.clone());
            }
        }
    }
    let g = |x: &Tuple| -> Result<ReduceColor> {
        let v = endo.apply(x)?;
        if v.sup() < x.min_coord() {
            Ok(ReduceColor::Val(v.clone()))
        } else {
            Ok(match &sentinel {
                Some(s) => ReduceColor::Val(s.clone()),
                None => ReduceColor::Reserved,
            })
        }
    };

    let mut found: Option<IndexSet> = None;
    'cand: for cand in e.k_subsets(p) {
        let pts = cand.power(k);
        let mut per_type: std::collections::BTreeMap<_, ReduceColor> =
            std::collections::BTreeMap::new();
        for x in pts.iter() {
            let c = g(x)?;
            let t = order_type(x);
            match per_type.get(&t) {
                None => {
                    per_type.insert(t, c);
                }
                Some(prev) if *prev != c => continue 'cand,
                _ => {}
            }
        }
        found = Some(cand);
        break;
    }

    let ot_target = ot(k)?;
    let kk_target = (k as u64).pow(k as u32);
    let regressive_count = match &found {
        None => None,
        Some(sub) => {
            let pts = sub.power(k);
            let vals = regressive_values(&endo.to_tuple_map(), &pts)?;
            Some(vals.len())
        }
    };
    Ok(RamseyReduceOutcome {
        subset: found,
        regressive_count,
        ot_target,
        kk_target,
    })
}

/// Raw re-evaluation of the sharp condition at a reported counterexample;
/// shared by tests and report validation.
pub fn reverify_sharp(
    u: &FunctionAssignment,
    o1: &StrictOrderSpec,
    o2: &StrictOrderSpec,
    a: &TupleSet,
    x: &Tuple,
) -> Result<bool> {
    let small = u.apply(a)?;
    let big = u.apply(&a.with(x.clone()))?;
    Ok(small.subgraph_of(&big)
        || a.iter().any(|y| {
            o1.lt(x, y) && o2.lt(big.apply(y).unwrap(), small.apply(y).unwrap())
        }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assignment::{Endomorphism, Rule};
    use std::collections::BTreeMap;

    fn ground1(n: u64) -> TupleSet {
        TupleSet::new(1, (0..n).map(Tuple::scalar)).unwrap()
    }

    fn identity_on(n: u64) -> FunctionAssignment {
        FunctionAssignment::new(1, ground1(n), Rule::Identity).unwrap()
    }

    /// Table over [3]^1: identity everywhere except U({0,2})(2) = 0.
    fn spec_table_counterexample() -> FunctionAssignment {
        let g = ground1(3);
        let mut table = BTreeMap::new();
        for a in g.subsets() {
            let special = a.len() == 2 && a.contains(&Tuple::scalar(0)) && a.contains(&Tuple::scalar(2));
            let mut graph: BTreeMap<Tuple, Tuple> =
                a.iter().map(|x| (x.clone(), x.clone())).collect();
            if special {
                graph.insert(Tuple::scalar(2), Tuple::scalar(0));
            }
            table.insert(a.clone(), Endomorphism::new(a, graph).unwrap());
        }
        FunctionAssignment::new(1, g, Rule::Table(table)).unwrap()
    }

    #[test]
    fn identity_is_sharp_star_and_end_preserving() {
        let u = identity_on(4);
        let sup = StrictOrderSpec::SupNorm;
        let ins = insertion_scope_exhaustive(&u.ground).unwrap();
        assert!(check_sharp_decreasing(&u, &sup, &sup, &ins).unwrap().holds);
        let pairs = pair_scope_exhaustive(&u.ground).unwrap();
        assert!(check_star_decreasing(&u, &sup, &sup, &pairs).unwrap().holds);
        let ends = end_scope_exhaustive(&u.ground, &sup).unwrap();
        assert!(check_end_preserving(&u, &sup, &ends).unwrap().holds);
    }

    #[test]
    fn dropped_value_without_higher_drop_fails_sharp() {
        let u = spec_table_counterexample();
        let sup = StrictOrderSpec::SupNorm;
        let ins = insertion_scope_exhaustive(&u.ground).unwrap();
        let v = check_sharp_decreasing(&u, &sup, &sup, &ins).unwrap();
        assert!(!v.holds);
        match v.counterexample.unwrap() {
            Counterexample::Insertion { a, x } => {
                // inserting 1 into {0,2} restores U(2)=2 with nothing above 1 dropping
                assert_eq!(x, Tuple::scalar(1));
                assert!(a.contains(&Tuple::scalar(0)) && a.contains(&Tuple::scalar(2)));
                assert!(!reverify_sharp(&u, &sup, &sup, &a, &x).unwrap());
            }
            other => panic!("unexpected counterexample {other:?}"),
        }
    }

    #[test]
    fn sharp_and_star_agree_on_the_table_example() {
        let u = spec_table_counterexample();
        let sup = StrictOrderSpec::SupNorm;
        let ins = insertion_scope_exhaustive(&u.ground).unwrap();
        let pairs = pair_scope_exhaustive(&u.ground).unwrap();
        let sharp = check_sharp_decreasing(&u, &sup, &sup, &ins).unwrap();
        let star = check_star_decreasing(&u, &sup, &sup, &pairs).unwrap();
        assert_eq!(sharp.holds, star.holds);
    }

    #[test]
    fn end_preservation_failure_has_a_witness_pair() {
        // U({0})(0)=0 but U({0,2})(0)=2
        let g = ground1(3);
        let mut table = BTreeMap::new();
        for a in g.subsets() {
            let special = a.len() == 2 && a.contains(&Tuple::scalar(0)) && a.contains(&Tuple::scalar(2));
            let mut graph: BTreeMap<Tuple, Tuple> =
                a.iter().map(|x| (x.clone(), x.clone())).collect();
            if special {
                graph.insert(Tuple::scalar(0), Tuple::scalar(2));
            }
            table.insert(a.clone(), Endomorphism::new(a, graph).unwrap());
        }
        let u = FunctionAssignment::new(1, g, Rule::Table(table)).unwrap();
        let sup = StrictOrderSpec::SupNorm;
        let ends = end_scope_exhaustive(&u.ground, &sup).unwrap();
        let v = check_end_preserving(&u, &sup, &ends).unwrap();
        assert!(!v.holds);
        match v.counterexample.unwrap() {
            Counterexample::Pair { a, b, .. } => {
                assert!(a.contains(&Tuple::scalar(0)));
                assert!(b.contains(&Tuple::scalar(2)));
            }
            other => panic!("unexpected counterexample {other:?}"),
        }
    }

    #[test]
    fn scope_caps_enforced() {
        let g = ground1(13);
        assert!(matches!(
            insertion_scope_exhaustive(&g),
            Err(Error::Budget { .. })
        ));
        let g = ground1(11);
        assert!(matches!(pair_scope_exhaustive(&g), Err(Error::Budget { .. })));
    }

    #[test]
    fn sampled_scopes_are_deterministic() {
        let g = ground1(8);
        let s1 = insertion_scope_sampled(&g, 42, 20);
        let s2 = insertion_scope_sampled(&g, 42, 20);
        assert_eq!(s1.0.len(), 20);
        for (p, q) in s1.0.iter().zip(&s2.0) {
            assert_eq!(p, q);
        }
    }

    #[test]
    fn end_scope_pairs_are_downward_closed() {
        let g = ground1(6);
        let sup = StrictOrderSpec::SupNorm;
        for (a, b) in end_scope_sampled(&g, &sup, 3, 30).0 {
            assert!(a.is_subset(&b));
            assert!(downward_closed_in(&a, &b, &sup));
        }
    }

    #[test]
    fn ramsey_reduce_on_identity_has_no_regressive_values() {
        let fld: std::collections::BTreeSet<u64> = (0..5).collect();
        let ground = TupleSet::cartesian_power(&fld, 2);
        let u = FunctionAssignment::new(2, ground.clone(), Rule::Identity).unwrap();
        let e = IndexSet::new(vec![0, 1, 2, 3, 4]);
        let out = ramsey_reduce(&u, &ground, &e, 3).unwrap();
        let sub = out.subset.unwrap();
        assert_eq!(sub.elements(), &[0, 1, 2]);
        assert_eq!(out.regressive_count, Some(0));
        assert_eq!(out.ot_target, 3);
        assert_eq!(out.kk_target, 4);
    }

    #[test]
    fn ramsey_reduce_requires_ek_in_a() {
        let fld: std::collections::BTreeSet<u64> = (0..3).collect();
        let ground = TupleSet::cartesian_power(&fld, 1);
        let u = FunctionAssignment::new(1, ground.clone(), Rule::Identity).unwrap();
        let a = TupleSet::new(1, [Tuple::scalar(0)]).unwrap();
        let e = IndexSet::new(vec![0, 1]);
        assert!(ramsey_reduce(&u, &a, &e, 1).is_err());
    }

    #[test]
    fn ramsey_reduce_respects_ot_bound_for_min_collapse() {
        let fld: std::collections::BTreeSet<u64> = (0..6).collect();
        let ground = TupleSet::cartesian_power(&fld, 2);
        let u = FunctionAssignment::new(2, ground.clone(), Rule::MinCollapse).unwrap();
        let e = IndexSet::new(vec![1, 2, 3, 4, 5]);
        let out = ramsey_reduce(&u, &ground, &e, 3).unwrap();
        if let Some(count) = out.regressive_count {
            assert!(count as u64 <= out.ot_target);
        }
    }
}
