//! Closed tuple sets: A is closed when every tuple whose coordinates all
//! occur in some member is itself a member.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::tuple::{Tuple, TupleSet};

pub const CLOSURE_SIZE_CAP: usize = 200_000;

pub fn is_closed(a: &TupleSet) -> bool {
    let k = a.arity();
    for y in a.iter() {
        let coords: BTreeSet<u64> = y.coord_set();
        for x in TupleSet::cartesian_power(&coords, k).iter() {
            if !a.contains(x) {
                return false;
            }
        }
    }
    true
}

/// If `a` is not closed, report a missing tuple together with the member
/// whose coordinates generate it.
pub fn closedness_witness(a: &TupleSet) -> Option<(Tuple, Tuple)> {
    let k = a.arity();
    for y in a.iter() {
        for x in TupleSet::cartesian_power(&y.coord_set(), k).iter() {
            if !a.contains(x) {
                return Some((x.clone(), y.clone()));
            }
        }
    }
    None
}

/// The least closed superset: all tuples generated over each member's
/// coordinate set. Its size is at most |fld(A)|^k.
pub fn closure(a: &TupleSet) -> Result<TupleSet> {
    let k = a.arity();
    let fld = a.field();
    let bound = (fld.len() as u128).checked_pow(k as u32);
    match bound {
        Some(b) if b <= CLOSURE_SIZE_CAP as u128 => {}
        _ => {
            return Err(Error::Budget {
                task: "closure",
                needed: bound.unwrap_or(u128::MAX),
                cap: CLOSURE_SIZE_CAP as u128,
            })
        }
    }
    let mut out = TupleSet::empty(k);
    for y in a.iter() {
        for x in TupleSet::cartesian_power(&y.coord_set(), k).iter() {
            out.insert(x.clone())?;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ts(arity: usize, members: &[&[u64]]) -> TupleSet {
        TupleSet::new(
            arity,
            members.iter().map(|m| Tuple::new(m.to_vec())),
        )
        .unwrap()
    }

    #[test]
    fn diagonal_is_closed() {
        let a = ts(3, &[&[4, 4, 4]]);
        assert!(is_closed(&a));
    }

    #[test]
    fn pair_closure() {
        let a = ts(2, &[&[0, 1]]);
        assert!(!is_closed(&a));
        let c = closure(&a).unwrap();
        let want = ts(2, &[&[0, 0], &[0, 1], &[1, 0], &[1, 1]]);
        assert_eq!(c, want);
    }

    #[test]
    fn closure_idempotent() {
        let a = ts(2, &[&[0, 2], &[1, 3]]);
        let c = closure(&a).unwrap();
        assert!(is_closed(&c));
        assert_eq!(closure(&c).unwrap(), c);
    }
}
