//! Order types of tuples: rank-replacement canonicalization and the count
//! ot(k) of distinct order types in dimension k.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::tuple::{OrderTypeCode, Tuple, TupleSet};

/// Enumeration of order types of arity > OT_ARITY_CAP is refused.
pub const OT_ARITY_CAP: usize = 8;

/// Canonicalize by rank replacement: each coordinate is mapped to its rank
/// among the distinct coordinate values. Two tuples get equal codes exactly
/// when they are of the same order type (coordinatewise < agrees).
pub fn order_type(x: &Tuple) -> OrderTypeCode {
    let distinct: Vec<u64> = x.coord_set().into_iter().collect();
    let pattern = x
        .coords()
        .iter()
        .map(|c| distinct.binary_search(c).unwrap() as u64)
        .collect();
    OrderTypeCode(pattern)
}

pub fn same_order_type(x: &Tuple, y: &Tuple) -> bool {
    order_type(x) == order_type(y)
}

/// ot(k): the number of distinct order types in dimension k, computed by
/// enumerating the codes realized in [k]^k.
pub fn ot(k: usize) -> Result<u64> {
    if k < 1 || k > OT_ARITY_CAP {
        return Err(Error::Budget {
            task: "ot enumeration",
            needed: k as u128,
            cap: OT_ARITY_CAP as u128,
        });
    }
    let ground = TupleSet::cartesian_power(&(0..k as u64).collect(), k);
    let codes: BTreeSet<OrderTypeCode> = ground.iter().map(order_type).collect();
    Ok(codes.len() as u64)
}

/// Independent route: ot(k) = sum over 1 <= i <= k of the number of
/// surjections from [k] onto [i], each counted by inclusion-exclusion.
pub fn ot_by_surjections(k: usize) -> u64 {
    (1..=k).map(|i| surjections(k, i)).sum()
}

fn surjections(k: usize, i: usize) -> u64 {
    // sum_j (-1)^j C(i, j) (i-j)^k
    let mut total: i128 = 0;
    for j in 0..=i {
        let term = (binomial(i, j) as i128) * ((i - j) as i128).pow(k as u32);
        if j % 2 == 0 {
            total += term;
        } else {
            total -= term;
        }
    }
    total as u64
}

fn binomial(n: usize, r: usize) -> u128 {
    if r > n {
        return 0;
    }
    let mut acc: u128 = 1;
    for i in 0..r.min(n - r) {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn already_canonical() {
        let code = order_type(&Tuple::new(vec![0, 1, 2]));
        assert_eq!(code.0, vec![0, 1, 2]);
    }

    #[test]
    fn constant_tuple() {
        let code = order_type(&Tuple::new(vec![7, 7]));
        assert_eq!(code.0, vec![0, 0]);
    }

    #[test]
    fn rank_replacement() {
        let code = order_type(&Tuple::new(vec![5, 2, 5]));
        assert_eq!(code.0, vec![1, 0, 1]);
    }

    #[test]
    fn small_counts() {
        assert_eq!(ot(1).unwrap(), 1);
        assert_eq!(ot(2).unwrap(), 3);
        assert_eq!(ot(3).unwrap(), 13);
    }

    #[test]
    fn cap_is_enforced() {
        assert!(ot(9).is_err());
        assert!(ot(0).is_err());
    }

    #[test]
    fn routes_agree() {
        for k in 1..=6 {
            assert_eq!(ot(k).unwrap(), ot_by_surjections(k), "k={k}");
        }
    }
}
