//! Decreasing functionals and recursion on the sup norm: RCN, MRCN, the
//! least-j fixpoint induced by a bounded existential formula, and dimension
//! slicing.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bef::BefFormula;
use crate::closure::{closedness_witness, is_closed};
use crate::error::{Error, Result};
use crate::tuple::{ScalarMap, Tuple, TupleSet};

/// fld of a finite partial scalar function: all coordinates of domain tuples
/// together with all values.
pub fn scalar_map_field(f: &ScalarMap) -> BTreeSet<u64> {
    let mut out = BTreeSet::new();
    for (k, v) in f {
        out.extend(k.coords().iter().copied());
        out.insert(*v);
    }
    out
}

/// A decreasing functional H(f, x): antitone under extension of f, valued in
/// fld(f) together with the coordinates of x.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Dfnl {
    /// H(f, x) = min(fld(f) ∪ {x_1, ..., x_k}).
    MinField,
    /// H(f, x) = least j in fld(f) ∪ coords(x) with j = |x| or B(x, j) true
    /// in f. The formula must have q = r + 1; the dimension is k = r.
    Bef(BefFormula),
}

impl Dfnl {
    pub fn apply(&self, f: &ScalarMap, x: &Tuple) -> u64 {
        match self {
            Dfnl::MinField => {
                let mut cands = scalar_map_field(f);
                cands.extend(x.coords().iter().copied());
                *cands.iter().next().unwrap()
            }
            Dfnl::Bef(b) => {
                let mut cands = scalar_map_field(f);
                cands.extend(x.coords().iter().copied());
                let sup = x.sup();
                let mut args: Vec<u64> = x.coords().to_vec();
                args.push(0);
                for j in cands {
                    if j == sup {
                        return j;
                    }
                    *args.last_mut().unwrap() = j;
                    if b.eval(f, &args) {
                        return j;
                    }
                }
                // |x| is always a candidate and always qualifies
                unreachable!("candidate set contains |x|")
            }
        }
    }
}

/// Wrap a formula with q = r + 1 as the functional it induces.
pub fn dfnl_from_bef(b: BefFormula) -> Result<Dfnl> {
    if b.q != b.r + 1 {
        return Err(Error::ArityMismatch {
            expected: b.r + 1,
            got: b.q,
        });
    }
    Ok(Dfnl::Bef(b))
}

/// Spot-check the two functional contracts on seeded random chains
/// f ⊆ g of scalar maps.
pub fn validate_dfnl(h: &Dfnl, k: usize, seed: u64, samples: usize) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let mut f = ScalarMap::new();
        let mut g = ScalarMap::new();
        let n_small = rng.gen_range(0..4);
        let n_extra = rng.gen_range(0..3);
        for _ in 0..n_small + n_extra {
            let key = Tuple::new((0..k).map(|_| rng.gen_range(0..6)).collect());
            let val = rng.gen_range(0..6);
            if g.len() < n_small {
                f.insert(key.clone(), val);
            }
            g.insert(key, val);
        }
        // keep f a restriction of g
        for (key, val) in &g {
            if let Some(v) = f.get_mut(key) {
                *v = *val;
            }
        }
        let x = Tuple::new((0..k).map(|_| rng.gen_range(0..6)).collect());
        let hf = h.apply(&f, &x);
        let hg = h.apply(&g, &x);
        if hf < hg {
            return Err(Error::Precondition(format!(
                "functional not antitone: H(f,{x}) = {hf} < H(g,{x}) = {hg}"
            )));
        }
        for (m, v) in [(&f, hf), (&g, hg)] {
            let mut allowed = scalar_map_field(m);
            allowed.extend(x.coords().iter().copied());
            if !allowed.contains(&v) {
                return Err(Error::ContractViolation { x, value: v });
            }
        }
    }
    Ok(())
}

/// Members of `a` sorted by nondecreasing sup norm; equal-sup tuples are
/// independent because the recursion restricts strictly below.
fn by_sup_levels(a: &TupleSet) -> Vec<Tuple> {
    let mut v: Vec<Tuple> = a.iter().cloned().collect();
    v.sort_by_key(|t| (t.sup(), t.clone()));
    v
}

fn restrict_below(f: &ScalarMap, bound: u64) -> ScalarMap {
    f.iter()
        .filter(|(k, _)| k.sup() < bound)
        .map(|(k, v)| (k.clone(), *v))
        .collect()
}

/// The unique F: A -> fld(A) with F(x) = H(F restricted strictly below |x|, x).
pub fn rcn(a: &TupleSet, h: &Dfnl) -> Result<ScalarMap> {
    let fld = a.field();
    let mut f = ScalarMap::new();
    for x in by_sup_levels(a) {
        let below = restrict_below(&f, x.sup());
        let v = h.apply(&below, &x);
        let mut allowed = scalar_map_field(&below);
        allowed.extend(x.coords().iter().copied());
        if !allowed.contains(&v) || !fld.contains(&v) {
            return Err(Error::ContractViolation { x, value: v });
        }
        f.insert(x, v);
    }
    Ok(f)
}

/// The coordinate-subset-complete part of `a`: members all of whose
/// coordinate-subset tuples also lie in `a`.
pub fn subset_complete_part(a: &TupleSet) -> TupleSet {
    let k = a.arity();
    let mut out = TupleSet::empty(k);
    for x in a.iter() {
        let all_in = TupleSet::cartesian_power(&x.coord_set(), k)
            .iter()
            .all(|y| a.contains(y));
        if all_in {
            out.insert(x.clone()).unwrap();
        }
    }
    out
}

/// Like `subset_complete_part`, but only coordinate-subset tuples of
/// strictly smaller sup norm are required to be present.
pub fn nearly_complete_part(a: &TupleSet) -> TupleSet {
    let k = a.arity();
    let mut out = TupleSet::empty(k);
    for x in a.iter() {
        let all_in = TupleSet::cartesian_power(&x.coord_set(), k)
            .iter()
            .all(|y| y.sup() >= x.sup() || a.contains(y));
        if all_in {
            out.insert(x.clone()).unwrap();
        }
    }
    out
}

/// Modified recursion: the restriction is cut down to the
/// coordinate-subset-complete part before H is consulted.
pub fn mrcn(a: &TupleSet, h: &Dfnl) -> Result<ScalarMap> {
    let a_prime = subset_complete_part(a);
    let fld = a.field();
    let mut f = ScalarMap::new();
    for x in by_sup_levels(a) {
        let below: ScalarMap = f
            .iter()
            .filter(|(k, _)| k.sup() < x.sup() && a_prime.contains(k))
            .map(|(k, v)| (k.clone(), *v))
            .collect();
        let v = h.apply(&below, &x);
        let mut allowed = scalar_map_field(&below);
        allowed.extend(x.coords().iter().copied());
        if !allowed.contains(&v) || !fld.contains(&v) {
            return Err(Error::ContractViolation { x, value: v });
        }
        f.insert(x, v);
    }
    Ok(f)
}

/// The least-j fixpoint of a formula with q = r + 1 on a closed set:
/// f(x) = min { j in fld(A) : j = |x| or B(x, j) true in f }, computed by
/// recursion on the sup norm and re-validated against the completed f.
pub fn df(b: &BefFormula, a: &TupleSet) -> Result<ScalarMap> {
    if b.q != b.r + 1 || a.arity() != b.r {
        return Err(Error::ArityMismatch {
            expected: b.r,
            got: a.arity(),
        });
    }
    if let Some((missing, member)) = closedness_witness(a) {
        return Err(Error::NotClosed(missing, member));
    }
    let fld: Vec<u64> = a.field().into_iter().collect();
    let mut f = ScalarMap::new();
    for x in by_sup_levels(a) {
        let below = restrict_below(&f, x.sup());
        let v = df_defining_min(b, &fld, &below, &x);
        f.insert(x, v);
    }
    // fixpoint validation: each value re-satisfies the defining min when
    // evaluated against the completed f
    for (x, v) in &f {
        let check = df_defining_min(b, &fld, &f, x);
        if check != *v {
            return Err(Error::Precondition(format!(
                "fixpoint validation failed at {x}: recomputed {check}, stored {v}"
            )));
        }
    }
    Ok(f)
}

fn df_defining_min(b: &BefFormula, fld: &[u64], f: &ScalarMap, x: &Tuple) -> u64 {
    let sup = x.sup();
    let mut args: Vec<u64> = x.coords().to_vec();
    args.push(0);
    for &j in fld {
        if j == sup {
            return j;
        }
        *args.last_mut().unwrap() = j;
        if b.eval(f, &args) {
            return j;
        }
    }
    // a closed set containing x contains the diagonal on |x|
    unreachable!("fld(A) contains |x| for closed A")
}

/// The r-dimensional part of f: f/r(x) = f(x, |x| repeated k - r times).
pub fn slice(f: &ScalarMap, k: usize, r: usize) -> Result<ScalarMap> {
    assert!(r < k, "slice requires r < k");
    let mut out = ScalarMap::new();
    let domain: Vec<Tuple> = f.keys().cloned().collect();
    for key in domain {
        if key.arity() != k {
            return Err(Error::ArityMismatch {
                expected: k,
                got: key.arity(),
            });
        }
    }
    // A/r = { x : (x, |x|*(k-r)) in A }
    let mut seen = BTreeSet::new();
    for full in f.keys() {
        let head = Tuple::new(full.coords()[..r].to_vec());
        if seen.contains(&head) {
            continue;
        }
        seen.insert(head.clone());
        let padded = head.concat(&Tuple::diagonal(head.sup(), k - r));
        if let Some(v) = f.get(&padded) {
            out.insert(head, *v);
        }
    }
    Ok(out)
}

/// The domain of a slice, as a set.
pub fn slice_domain(a: &TupleSet, r: usize) -> Result<TupleSet> {
    let k = a.arity();
    assert!(r < k, "slice requires r < k");
    let mut out = TupleSet::empty(r);
    for full in a.iter() {
        let head = Tuple::new(full.coords()[..r].to_vec());
        let padded = head.concat(&Tuple::diagonal(head.sup(), k - r));
        if a.contains(&padded) {
            out.insert(head)?;
        }
    }
    Ok(out)
}

/// Convenience check used by callers that require closedness up front.
pub fn require_closed(a: &TupleSet) -> Result<()> {
    if !is_closed(a) {
        let (missing, member) = closedness_witness(a).unwrap();
        return Err(Error::NotClosed(missing, member));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bef::parse_bef;

    fn set1(vals: &[u64]) -> TupleSet {
        TupleSet::new(1, vals.iter().map(|&v| Tuple::scalar(v))).unwrap()
    }

    #[test]
    fn min_field_rcn_collapses() {
        let a = set1(&[0, 2, 5]);
        let f = rcn(&a, &Dfnl::MinField).unwrap();
        assert_eq!(f[&Tuple::scalar(0)], 0);
        assert_eq!(f[&Tuple::scalar(2)], 0);
        assert_eq!(f[&Tuple::scalar(5)], 0);
    }

    #[test]
    fn singleton_value_is_a_coordinate() {
        let a = TupleSet::new(2, [Tuple::new(vec![3, 7])]).unwrap();
        let f = rcn(&a, &Dfnl::MinField).unwrap();
        let v = f[&Tuple::new(vec![3, 7])];
        assert!(v == 3 || v == 7);
    }

    #[test]
    fn rcn_values_in_field() {
        let a = TupleSet::new(2, [
            Tuple::new(vec![1, 2]),
            Tuple::new(vec![2, 4]),
            Tuple::new(vec![4, 4]),
        ])
        .unwrap();
        let fld = a.field();
        let f = rcn(&a, &Dfnl::MinField).unwrap();
        assert!(f.values().all(|v| fld.contains(v)));
    }

    #[test]
    fn bef_never_true_gives_sup() {
        // x1 < x1 is unsatisfiable, so the least qualifying j is |x|
        let b = parse_bef("bef q=2 t=1 r=1 : x1 < x1").unwrap();
        let h = dfnl_from_bef(b).unwrap();
        let a = set1(&[1, 3, 4]);
        let f = rcn(&a, &h).unwrap();
        for x in a.iter() {
            assert_eq!(f[x], x.sup());
        }
    }

    #[test]
    fn bef_tautology_gives_min() {
        let b = parse_bef("bef q=2 t=1 r=1 : x1 = x1").unwrap();
        let h = dfnl_from_bef(b).unwrap();
        let a = set1(&[1, 3, 4]);
        let f = rcn(&a, &h).unwrap();
        // H(empty, 1) = 1; afterwards fld(f) contains 1, which qualifies
        assert_eq!(f[&Tuple::scalar(1)], 1);
        assert_eq!(f[&Tuple::scalar(3)], 1);
        assert_eq!(f[&Tuple::scalar(4)], 1);
    }

    #[test]
    fn shape_mismatch_rejected() {
        let b = parse_bef("bef q=1 t=1 r=1 : x1 = x1").unwrap();
        assert!(dfnl_from_bef(b).is_err());
    }

    #[test]
    fn df_requires_closed() {
        let b = parse_bef("bef q=2 t=1 r=1 : f1 < x1").unwrap();
        let open = TupleSet::new(2, [Tuple::new(vec![0, 1])]).unwrap();
        // arity mismatch is checked first; use a matching-arity open set
        let open1 = TupleSet::new(1, [Tuple::scalar(0)]).unwrap();
        assert!(df(&b, &open).is_err());
        assert!(df(&b, &open1).is_ok()); // singletons of arity 1 are closed
    }

    #[test]
    fn df_matches_rcn_on_closed_sets() {
        let b = parse_bef("bef q=2 t=1 r=1 : f1 < x1 | y1 = x1").unwrap();
        let h = dfnl_from_bef(b.clone()).unwrap();
        let a = set1(&[0, 1, 3, 5]);
        assert_eq!(df(&b, &a).unwrap(), rcn(&a, &h).unwrap());
    }

    #[test]
    fn mrcn_extends_rcn_of_complete_part() {
        let a = TupleSet::new(2, [
            Tuple::new(vec![0, 0]),
            Tuple::new(vec![0, 1]),
            Tuple::new(vec![1, 0]),
            Tuple::new(vec![1, 1]),
            Tuple::new(vec![2, 3]),
        ])
        .unwrap();
        let h = Dfnl::MinField;
        let m = mrcn(&a, &h).unwrap();
        let a_prime = subset_complete_part(&a);
        let r = rcn(&a_prime, &h).unwrap();
        for (k, v) in &r {
            assert_eq!(m.get(k), Some(v), "at {k}");
        }
    }

    #[test]
    fn validate_builtin_and_bef() {
        validate_dfnl(&Dfnl::MinField, 2, 7, 200).unwrap();
        let b = parse_bef("bef q=3 t=1 r=2 : f1 < x3 & y1 < x1").unwrap();
        let h = dfnl_from_bef(b).unwrap();
        validate_dfnl(&h, 2, 7, 200).unwrap();
    }

    #[test]
    fn slice_of_closed_is_closed() {
        let vals: BTreeSet<u64> = [0, 2, 5].into_iter().collect();
        let a = TupleSet::cartesian_power(&vals, 2);
        let f = rcn(&a, &Dfnl::MinField).unwrap();
        let s = slice(&f, 2, 1).unwrap();
        let dom = slice_domain(&a, 1).unwrap();
        assert!(is_closed(&dom));
        assert_eq!(dom.field(), a.field());
        // f/1(x) = f(x, x)
        for x in dom.iter() {
            let diag = x.concat(x);
            assert_eq!(s[x], f[&diag]);
        }
    }
}
