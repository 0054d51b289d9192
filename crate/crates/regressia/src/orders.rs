//! Strict orders on tuple spaces: sup-norm, lexicographic, and explicit
//! relations over a bounded ground, with upwardness checking.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::tuple::{Tuple, TupleSet};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StrictOrderSpec {
    /// |x| < |y|
    SupNorm,
    /// Strict lexicographic order.
    Lex,
    /// An explicit relation over a bounded ground, validated on construction.
    Explicit {
        ground: TupleSet,
        pairs: BTreeSet<(Tuple, Tuple)>,
    },
}

impl StrictOrderSpec {
    /// Build an explicit order, checking irreflexivity and transitivity on
    /// the declared ground eagerly.
    pub fn explicit(ground: TupleSet, pairs: BTreeSet<(Tuple, Tuple)>) -> Result<Self> {
        for (x, y) in &pairs {
            if x == y {
                return Err(Error::NotIrreflexive(x.clone()));
            }
        }
        for (x, y) in &pairs {
            for (y2, z) in &pairs {
                if y == y2 && !pairs.contains(&(x.clone(), z.clone())) {
                    return Err(Error::NotTransitive(x.clone(), y.clone(), z.clone()));
                }
            }
        }
        Ok(StrictOrderSpec::Explicit { ground, pairs })
    }

    pub fn lt(&self, x: &Tuple, y: &Tuple) -> bool {
        match self {
            StrictOrderSpec::SupNorm => x.sup() < y.sup(),
            StrictOrderSpec::Lex => x.lex_lt(y),
            StrictOrderSpec::Explicit { pairs, .. } => pairs.contains(&(x.clone(), y.clone())),
        }
    }
}

fn coordinatewise_le(x: &Tuple, y: &Tuple) -> bool {
    x.coords().iter().zip(y.coords()).all(|(a, b)| a <= b)
}

/// An order is upward when x <=_c y implies not (y < x). The sup-norm and
/// lexicographic orders are upward on every ground.
pub fn is_upward(order: &StrictOrderSpec, ground: &TupleSet) -> bool {
    match order {
        StrictOrderSpec::SupNorm | StrictOrderSpec::Lex => true,
        StrictOrderSpec::Explicit { .. } => {
            for x in ground.iter() {
                for y in ground.iter() {
                    if coordinatewise_le(x, y) && order.lt(y, x) {
                        return false;
                    }
                }
            }
            true
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ground_square(n: u64) -> TupleSet {
        TupleSet::cartesian_power(&(0..n).collect(), 2)
    }

    #[test]
    fn builtins_are_upward() {
        let g = ground_square(4);
        assert!(is_upward(&StrictOrderSpec::SupNorm, &g));
        assert!(is_upward(&StrictOrderSpec::Lex, &g));
    }

    #[test]
    fn reverse_lex_is_not_upward() {
        let g = ground_square(2);
        let mut pairs = BTreeSet::new();
        for x in g.iter() {
            for y in g.iter() {
                if y.lex_lt(x) {
                    pairs.insert((x.clone(), y.clone()));
                }
            }
        }
        let rev = StrictOrderSpec::explicit(g.clone(), pairs).unwrap();
        assert!(!is_upward(&rev, &g));
    }

    #[test]
    fn non_transitive_relation_rejected() {
        let g = TupleSet::new(1, (0..3).map(Tuple::scalar)).unwrap();
        let pairs: BTreeSet<_> = [
            (Tuple::scalar(0), Tuple::scalar(1)),
            (Tuple::scalar(1), Tuple::scalar(2)),
        ]
        .into_iter()
        .collect();
        assert!(matches!(
            StrictOrderSpec::explicit(g, pairs),
            Err(Error::NotTransitive(..))
        ));
    }

    #[test]
    fn reflexive_pair_rejected() {
        let g = TupleSet::new(1, (0..2).map(Tuple::scalar)).unwrap();
        let pairs: BTreeSet<_> = [(Tuple::scalar(0), Tuple::scalar(0))].into_iter().collect();
        assert!(matches!(
            StrictOrderSpec::explicit(g, pairs),
            Err(Error::NotIrreflexive(_))
        ));
    }
}
