//! Shared vocabulary: tuples of naturals, finite tuple sets, index sets, and
//! finite tuple-valued maps.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A vector of naturals of arity `k >= 1`, the ambient object of every
/// construction in this crate.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Tuple(Vec<u64>);

impl Tuple {
    pub fn new(coords: Vec<u64>) -> Self {
        assert!(!coords.is_empty(), "tuple arity must be >= 1");
        Tuple(coords)
    }

    pub fn scalar(v: u64) -> Self {
        Tuple(vec![v])
    }

    /// The j-tuple all of whose coordinates are `v`.
    pub fn diagonal(v: u64, arity: usize) -> Self {
        Tuple(vec![v; arity])
    }

    pub fn arity(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[u64] {
        &self.0
    }

    /// Sup norm: the maximum coordinate.
    pub fn sup(&self) -> u64 {
        *self.0.iter().max().unwrap()
    }

    /// The minimum coordinate.
    pub fn min_coord(&self) -> u64 {
        *self.0.iter().min().unwrap()
    }

    /// Every coordinate of `self` is a coordinate of `other`.
    pub fn coord_subset_of(&self, other: &Tuple) -> bool {
        self.0.iter().all(|c| other.0.contains(c))
    }

    pub fn is_strictly_increasing(&self) -> bool {
        self.0.windows(2).all(|w| w[0] < w[1])
    }

    /// The set of distinct coordinates, ascending.
    pub fn coord_set(&self) -> BTreeSet<u64> {
        self.0.iter().copied().collect()
    }

    pub fn concat(&self, other: &Tuple) -> Tuple {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Tuple(v)
    }

    pub fn lex_lt(&self, other: &Tuple) -> bool {
        self.0 < other.0
    }
}

impl fmt::Debug for Tuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Display for Tuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Canonical rank pattern of a tuple; two tuples have the same order type
/// exactly when their codes are equal.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OrderTypeCode(pub Vec<u64>);

/// A duplicate-free finite set of tuples of a common arity.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct TupleSet {
    arity: usize,
    members: BTreeSet<Tuple>,
}

impl TupleSet {
    pub fn empty(arity: usize) -> Self {
        TupleSet {
            arity,
            members: BTreeSet::new(),
        }
    }

    pub fn new(arity: usize, members: impl IntoIterator<Item = Tuple>) -> Result<Self> {
        let mut set = TupleSet::empty(arity);
        for t in members {
            set.insert(t)?;
        }
        Ok(set)
    }

    pub fn insert(&mut self, t: Tuple) -> Result<()> {
        if t.arity() != self.arity {
            return Err(Error::ArityMismatch {
                expected: self.arity,
                got: t.arity(),
            });
        }
        self.members.insert(t);
        Ok(())
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, t: &Tuple) -> bool {
        self.members.contains(t)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Tuple> + Clone {
        self.members.iter()
    }

    pub fn is_subset(&self, other: &TupleSet) -> bool {
        self.members.is_subset(&other.members)
    }

    pub fn union(&self, other: &TupleSet) -> TupleSet {
        TupleSet {
            arity: self.arity,
            members: self.members.union(&other.members).cloned().collect(),
        }
    }

    pub fn with(&self, t: Tuple) -> TupleSet {
        let mut s = self.clone();
        s.members.insert(t);
        s
    }

    /// The set of all coordinates of members.
    pub fn field(&self) -> BTreeSet<u64> {
        self.members
            .iter()
            .flat_map(|t| t.coords().iter().copied())
            .collect()
    }

    /// All tuples of this arity over the given coordinate values; this is the
    /// full Cartesian power, which is always closed.
    pub fn cartesian_power(values: &BTreeSet<u64>, arity: usize) -> TupleSet {
        let vals: Vec<u64> = values.iter().copied().collect();
        let mut members = BTreeSet::new();
        let n = vals.len();
        if n == 0 {
            return TupleSet { arity, members };
        }
        let mut idx = vec![0usize; arity];
        loop {
            members.insert(Tuple::new(idx.iter().map(|&i| vals[i]).collect()));
            let mut pos = arity;
            loop {
                if pos == 0 {
                    return TupleSet { arity, members };
                }
                pos -= 1;
                idx[pos] += 1;
                if idx[pos] < n {
                    break;
                }
                idx[pos] = 0;
            }
        }
    }

    /// All subsets, enumerated deterministically (bitmask order over the
    /// sorted member list).
    pub fn subsets(&self) -> impl Iterator<Item = TupleSet> + '_ {
        let members: Vec<Tuple> = self.members.iter().cloned().collect();
        let arity = self.arity;
        let n = members.len();
        assert!(n < 64, "subset enumeration limited to sets of < 64 tuples");
        (0u64..(1 << n)).map(move |mask| {
            let chosen = members
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, t)| t.clone())
                .collect();
            TupleSet {
                arity,
                members: chosen,
            }
        })
    }
}

/// A finite strictly increasing sequence of naturals. `E_i` is the i-th least
/// element, 1-based.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IndexSet(Vec<u64>);

impl IndexSet {
    pub fn new(mut elements: Vec<u64>) -> Self {
        elements.sort_unstable();
        elements.dedup();
        IndexSet(elements)
    }

    pub fn range(n: u64) -> Self {
        IndexSet((0..n).collect())
    }

    pub fn elements(&self) -> &[u64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: u64) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    /// 1-based access per the convention `E_1 = min(E)`.
    pub fn nth(&self, i: usize) -> u64 {
        self.0[i - 1]
    }

    /// All k-element subsets in lexicographic order.
    pub fn k_subsets(&self, k: usize) -> Vec<IndexSet> {
        let mut out = Vec::new();
        let n = self.0.len();
        if k > n {
            return out;
        }
        let mut idx: Vec<usize> = (0..k).collect();
        loop {
            out.push(IndexSet(idx.iter().map(|&i| self.0[i]).collect()));
            // advance the combination
            let mut pos = k;
            loop {
                if pos == 0 {
                    return out;
                }
                pos -= 1;
                if idx[pos] < n - (k - pos) {
                    idx[pos] += 1;
                    for j in pos + 1..k {
                        idx[j] = idx[j - 1] + 1;
                    }
                    break;
                }
            }
        }
    }

    /// E^k as a TupleSet.
    pub fn power(&self, k: usize) -> TupleSet {
        TupleSet::cartesian_power(&self.0.iter().copied().collect(), k)
    }
}

impl FromIterator<u64> for IndexSet {
    fn from_iter<I: IntoIterator<Item = u64>>(iter: I) -> Self {
        IndexSet::new(iter.into_iter().collect())
    }
}

/// The value of a tuple map: a tuple of arity r, or a scalar. Scalars are
/// unified with arity-1 tuples so one regressive-value routine serves both
/// vector-valued and scalar systems.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Scalar(u64),
    Vector(Tuple),
}

impl Value {
    pub fn sup(&self) -> u64 {
        match self {
            Value::Scalar(v) => *v,
            Value::Vector(t) => t.sup(),
        }
    }
}

impl From<u64> for Value {
    fn from(v: u64) -> Self {
        Value::Scalar(v)
    }
}

impl From<Tuple> for Value {
    fn from(t: Tuple) -> Self {
        Value::Vector(t)
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Scalar(v) => write!(f, "{v}"),
            Value::Vector(t) => write!(f, "{t}"),
        }
    }
}

/// A finite partial map from tuples to scalar naturals; the carrier of the
/// recursion-on-sup-norm machinery.
pub type ScalarMap = BTreeMap<Tuple, u64>;

/// A finite partial map from tuples of a common arity to values.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct TupleMap {
    graph: BTreeMap<Tuple, Value>,
}

impl TupleMap {
    pub fn new() -> Self {
        TupleMap::default()
    }

    pub fn insert(&mut self, key: Tuple, value: Value) {
        if let Some(first) = self.graph.keys().next() {
            assert_eq!(first.arity(), key.arity(), "all keys must share arity");
        }
        self.graph.insert(key, value);
    }

    pub fn get(&self, key: &Tuple) -> Option<&Value> {
        self.graph.get(key)
    }

    pub fn len(&self) -> usize {
        self.graph.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graph.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Tuple, &Value)> {
        self.graph.iter()
    }

    pub fn keys(&self) -> impl Iterator<Item = &Tuple> {
        self.graph.keys()
    }
}

impl FromIterator<(Tuple, Value)> for TupleMap {
    fn from_iter<I: IntoIterator<Item = (Tuple, Value)>>(iter: I) -> Self {
        let mut m = TupleMap::new();
        for (k, v) in iter {
            m.insert(k, v);
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sup_and_min() {
        let t = Tuple::new(vec![5, 2, 5]);
        assert_eq!(t.sup(), 5);
        assert_eq!(t.min_coord(), 2);
    }

    #[test]
    fn coord_subset() {
        let x = Tuple::new(vec![1, 1]);
        let y = Tuple::new(vec![1, 3]);
        assert!(x.coord_subset_of(&y));
        assert!(!y.coord_subset_of(&x));
    }

    #[test]
    fn k_subsets_lex_order() {
        let e = IndexSet::new(vec![0, 1, 2, 3]);
        let pairs = e.k_subsets(2);
        assert_eq!(pairs.len(), 6);
        assert_eq!(pairs[0].elements(), &[0, 1]);
        assert_eq!(pairs[5].elements(), &[2, 3]);
    }

    #[test]
    fn cartesian_power_size() {
        let vals: BTreeSet<u64> = [0, 1].into_iter().collect();
        assert_eq!(TupleSet::cartesian_power(&vals, 2).len(), 4);
    }

    #[test]
    fn tuple_set_rejects_mixed_arity() {
        let mut s = TupleSet::empty(2);
        s.insert(Tuple::new(vec![0, 1])).unwrap();
        assert!(s.insert(Tuple::new(vec![0])).is_err());
    }
}
