//! Regressive values: y = F(x) with |y| < min(x).

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::tuple::{TupleMap, TupleSet, Value};

/// The set { F(x) : x in B, |F(x)| < min(x) }, deduplicated.
pub fn regressive_values(f: &TupleMap, b: &TupleSet) -> Result<BTreeSet<Value>> {
    let mut out = BTreeSet::new();
    for x in b.iter() {
        let y = f.get(x).ok_or_else(|| Error::MissingKey(x.clone()))?;
        if y.sup() < x.min_coord() {
            out.insert(y.clone());
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tuple::Tuple;

    /// The introductory example: F(x,y) = (x-y)^2 on powers of two has 0 as
    /// its only regressive value.
    #[test]
    fn squared_difference_on_powers_of_two() {
        let pows: Vec<u64> = (0..4).map(|i| 1u64 << i).collect();
        let mut f = TupleMap::new();
        let mut b = TupleSet::empty(2);
        for &x in &pows {
            for &y in &pows {
                let t = Tuple::new(vec![x, y]);
                let d = x.abs_diff(y);
                f.insert(t.clone(), Value::Scalar(d * d));
                b.insert(t).unwrap();
            }
        }
        let vals = regressive_values(&f, &b).unwrap();
        assert_eq!(vals, [Value::Scalar(0)].into_iter().collect());
    }

    #[test]
    fn empty_domain() {
        let f = TupleMap::new();
        let b = TupleSet::empty(2);
        assert!(regressive_values(&f, &b).unwrap().is_empty());
    }

    #[test]
    fn constant_zero() {
        let mut f = TupleMap::new();
        let mut b = TupleSet::empty(1);
        for v in 0..5 {
            f.insert(Tuple::scalar(v), Value::Scalar(0));
        }
        for v in 1..5 {
            b.insert(Tuple::scalar(v)).unwrap();
        }
        let vals = regressive_values(&f, &b).unwrap();
        assert_eq!(vals, [Value::Scalar(0)].into_iter().collect());
    }

    #[test]
    fn missing_key_names_tuple() {
        let f = TupleMap::new();
        let b = TupleSet::new(1, [Tuple::scalar(3)]).unwrap();
        match regressive_values(&f, &b) {
            Err(Error::MissingKey(t)) => assert_eq!(t, Tuple::scalar(3)),
            other => panic!("expected missing key, got {other:?}"),
        }
    }

    #[test]
    fn monotone_in_b() {
        let mut f = TupleMap::new();
        for x in 0..4 {
            for y in 0..4 {
                f.insert(Tuple::new(vec![x, y]), Value::Scalar(x.abs_diff(y)));
            }
        }
        let small = TupleSet::new(2, [Tuple::new(vec![2, 3])]).unwrap();
        let big = small.with(Tuple::new(vec![3, 1]));
        let vs = regressive_values(&f, &small).unwrap();
        let vb = regressive_values(&f, &big).unwrap();
        assert!(vs.is_subset(&vb));
    }
}
