//! Function assignments: finite subsets of a bounded ground mapped to
//! endomorphisms, with table-backed and builtin rules, plus the instance
//! document consumed by the CLI.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::bef::parse_bef;
use crate::dfnl::{mrcn, nearly_complete_part, Dfnl};
use crate::error::{Error, Result};
use crate::tuple::{Tuple, TupleMap, TupleSet, Value};

/// A total map A -> A carried by an explicit finite set.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Endomorphism {
    carrier: TupleSet,
    graph: BTreeMap<Tuple, Tuple>,
}

impl Endomorphism {
    pub fn new(carrier: TupleSet, graph: BTreeMap<Tuple, Tuple>) -> Result<Self> {
        for x in carrier.iter() {
            match graph.get(x) {
                None => return Err(Error::MissingKey(x.clone())),
                Some(v) if !carrier.contains(v) => {
                    return Err(Error::CarrierEscape {
                        key: x.clone(),
                        value: v.clone(),
                    })
                }
                _ => {}
            }
        }
        for k in graph.keys() {
            if !carrier.contains(k) {
                return Err(Error::CarrierEscape {
                    key: k.clone(),
                    value: k.clone(),
                });
            }
        }
        Ok(Endomorphism { carrier, graph })
    }

    pub fn identity(carrier: TupleSet) -> Self {
        let graph = carrier.iter().map(|x| (x.clone(), x.clone())).collect();
        Endomorphism { carrier, graph }
    }

    pub fn carrier(&self) -> &TupleSet {
        &self.carrier
    }

    pub fn apply(&self, x: &Tuple) -> Result<&Tuple> {
        self.graph.get(x).ok_or_else(|| Error::MissingKey(x.clone()))
    }

    pub fn graph(&self) -> &BTreeMap<Tuple, Tuple> {
        &self.graph
    }

    /// Graph inclusion: every pair of self also belongs to other.
    pub fn subgraph_of(&self, other: &Endomorphism) -> bool {
        self.graph
            .iter()
            .all(|(k, v)| other.graph.get(k) == Some(v))
    }

    /// View as a tuple-valued map for regressive-value counting.
    pub fn to_tuple_map(&self) -> TupleMap {
        let mut m = TupleMap::new();
        for (k, v) in &self.graph {
            m.insert(k.clone(), Value::Vector(v.clone()));
        }
        m
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Rule {
    /// Explicit endomorphism per subset of the ground; must be total over
    /// the powerset.
    Table(BTreeMap<TupleSet, Endomorphism>),
    Identity,
    /// Every member of A maps to the lexicographically least member of A.
    MinCollapse,
    /// The assignment V built from a decreasing functional: on the
    /// nearly-complete part, the modified-recursion value embedded as a
    /// diagonal tuple when it drops below the sup norm; identity elsewhere.
    DfnlDerived(Dfnl),
    /// Dimension lift of an inner assignment of arity k to arity k+1.
    LexLift(Box<FunctionAssignment>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FunctionAssignment {
    pub arity: usize,
    pub ground: TupleSet,
    pub rule: Rule,
}

impl FunctionAssignment {
    pub fn new(arity: usize, ground: TupleSet, rule: Rule) -> Result<Self> {
        if ground.arity() != arity {
            return Err(Error::ArityMismatch {
                expected: arity,
                got: ground.arity(),
            });
        }
        if let Rule::Table(table) = &rule {
            let mut count = 0usize;
            for a in ground.subsets() {
                count += 1;
                match table.get(&a) {
                    None => return Err(Error::TableGap(a.len())),
                    Some(endo) if endo.carrier() != &a => {
                        return Err(Error::Precondition(format!(
                            "table entry carrier differs from its {}-element key",
                            a.len()
                        )))
                    }
                    _ => {}
                }
            }
            if table.len() != count {
                return Err(Error::Precondition(
                    "table has entries for sets outside the ground's powerset".into(),
                ));
            }
        }
        if let Rule::LexLift(inner) = &rule {
            if inner.arity + 1 != arity {
                return Err(Error::ArityMismatch {
                    expected: inner.arity + 1,
                    got: arity,
                });
            }
        }
        Ok(FunctionAssignment { arity, ground, rule })
    }

    pub fn apply(&self, a: &TupleSet) -> Result<Endomorphism> {
        if a.arity() != self.arity {
            return Err(Error::ArityMismatch {
                expected: self.arity,
                got: a.arity(),
            });
        }
        if !a.is_subset(&self.ground) {
            return Err(Error::Precondition(
                "queried set is not a subset of the assignment's ground".into(),
            ));
        }
        match &self.rule {
            Rule::Table(table) => table
                .get(a)
                .cloned()
                .ok_or_else(|| Error::TableGap(a.len())),
            Rule::Identity => Ok(Endomorphism::identity(a.clone())),
            Rule::MinCollapse => {
                if a.is_empty() {
                    return Ok(Endomorphism::identity(a.clone()));
                }
                let least = a
                    .iter()
                    .min_by(|x, y| {
                        if x.lex_lt(y) {
                            std::cmp::Ordering::Less
                        } else {
                            std::cmp::Ordering::Greater
                        }
                    })
                    .unwrap()
                    .clone();
                let graph = a.iter().map(|x| (x.clone(), least.clone())).collect();
                Endomorphism::new(a.clone(), graph)
            }
            Rule::DfnlDerived(h) => {
                let m = mrcn(a, h)?;
                let hat = nearly_complete_part(a);
                let mut graph = BTreeMap::new();
                for x in a.iter() {
                    let v = m[x];
                    let image = if hat.contains(x) && v < x.sup() {
                        Tuple::diagonal(v, self.arity)
                    } else {
                        x.clone()
                    };
                    graph.insert(x.clone(), image);
                }
                Endomorphism::new(a.clone(), graph)
            }
            Rule::LexLift(inner) => {
                // A' = { x : (|x|, x) in A }; lifted points move with the
                // inner assignment, every other member is fixed.
                let mut a_prime = TupleSet::empty(inner.arity);
                for y in a.iter() {
                    let tail = Tuple::new(y.coords()[1..].to_vec());
                    if y.coords()[0] == tail.sup() {
                        a_prime.insert(tail)?;
                    }
                }
                let u = inner.apply(&a_prime)?;
                let mut graph = BTreeMap::new();
                for y in a.iter() {
                    let tail = Tuple::new(y.coords()[1..].to_vec());
                    let image = if y.coords()[0] == tail.sup() {
                        let ux = u.apply(&tail)?;
                        let lifted = Tuple::scalar(ux.sup()).concat(ux);
                        if a.contains(&lifted) {
                            lifted
                        } else {
                            // the image point must stay in the carrier; the
                            // lifted assignment only moves within lifted sets
                            return Err(Error::CarrierEscape {
                                key: y.clone(),
                                value: lifted,
                            });
                        }
                    } else {
                        y.clone()
                    };
                    graph.insert(y.clone(), image);
                }
                Endomorphism::new(a.clone(), graph)
            }
        }
    }
}

/// The Lemma 5.2 assignment builder: the sharp-decreasing V induced by a
/// decreasing functional over the given ground.
pub fn dfnl_assignment(h: Dfnl, ground: TupleSet) -> Result<FunctionAssignment> {
    let arity = ground.arity();
    FunctionAssignment::new(arity, ground, Rule::DfnlDerived(h))
}

/// Lift an assignment of arity k to one of arity k+1 whose lifted points
/// carry sup-norm prefixes. The ground is the full power of the inner field.
pub fn lex_lift(u: FunctionAssignment) -> Result<FunctionAssignment> {
    let fld = u.ground.field();
    let arity = u.arity + 1;
    let ground = TupleSet::cartesian_power(&fld, arity);
    FunctionAssignment::new(arity, ground, Rule::LexLift(Box::new(u)))
}

/// A uniformly random table assignment over the given ground: every subset
/// gets an arbitrary endomorphism. Used as the sampling pool for audits.
pub fn random_table_assignment(
    ground: &TupleSet,
    rng: &mut rand_chacha::ChaCha8Rng,
) -> FunctionAssignment {
    use rand::Rng;
    let mut table = BTreeMap::new();
    for a in ground.subsets() {
        let members: Vec<&Tuple> = a.iter().collect();
        let graph: BTreeMap<Tuple, Tuple> = members
            .iter()
            .map(|x| {
                let img = members[rng.gen_range(0..members.len().max(1))].clone();
                ((*x).clone(), img)
            })
            .collect();
        table.insert(a.clone(), Endomorphism { carrier: a, graph });
    }
    FunctionAssignment {
        arity: ground.arity(),
        ground: ground.clone(),
        rule: Rule::Table(table),
    }
}

// ---------------------------------------------------------------------------
// Instance document: the serialized description consumed and produced by the
// CLI. Round-trips bit-exactly because every collection is sorted.

#[derive(Serialize, Deserialize)]
struct TableEntryDoc {
    subset: Vec<Tuple>,
    graph: Vec<(Tuple, Tuple)>,
}

#[derive(Serialize, Deserialize)]
struct InstanceDoc {
    kind: String,
    arity: usize,
    ground: Vec<Tuple>,
    #[serde(skip_serializing_if = "Option::is_none")]
    table: Option<Vec<TableEntryDoc>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    builtin: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    bef: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    inner: Option<Box<InstanceDoc>>,
}

fn to_doc(u: &FunctionAssignment) -> InstanceDoc {
    let ground: Vec<Tuple> = u.ground.iter().cloned().collect();
    let mut doc = InstanceDoc {
        kind: if matches!(u.rule, Rule::Table(_)) {
            "table".into()
        } else {
            "builtin".into()
        },
        arity: u.arity,
        ground,
        table: None,
        builtin: None,
        bef: None,
        inner: None,
    };
    match &u.rule {
        Rule::Table(table) => {
            doc.table = Some(
                table
                    .iter()
                    .map(|(a, endo)| TableEntryDoc {
                        subset: a.iter().cloned().collect(),
                        graph: endo
                            .graph()
                            .iter()
                            .map(|(k, v)| (k.clone(), v.clone()))
                            .collect(),
                    })
                    .collect(),
            );
        }
        Rule::Identity => doc.builtin = Some("identity".into()),
        Rule::MinCollapse => doc.builtin = Some("min-collapse".into()),
        Rule::DfnlDerived(Dfnl::MinField) => doc.builtin = Some("dfnl-min-field".into()),
        Rule::DfnlDerived(Dfnl::Bef(b)) => {
            doc.builtin = Some("dfnl-bef".into());
            doc.bef = Some(b.to_string());
        }
        Rule::LexLift(inner) => {
            doc.builtin = Some("lex-lift".into());
            doc.inner = Some(Box::new(to_doc(inner)));
        }
    }
    doc
}

fn from_doc(doc: &InstanceDoc) -> Result<FunctionAssignment> {
    let ground = TupleSet::new(doc.arity, doc.ground.iter().cloned())?;
    let rule = match doc.kind.as_str() {
        "table" => {
            let entries = doc
                .table
                .as_ref()
                .ok_or_else(|| Error::Precondition("table kind without table field".into()))?;
            let mut table = BTreeMap::new();
            for entry in entries {
                let subset = TupleSet::new(doc.arity, entry.subset.iter().cloned())?;
                let graph: BTreeMap<Tuple, Tuple> = entry.graph.iter().cloned().collect();
                let endo = Endomorphism::new(subset.clone(), graph)?;
                table.insert(subset, endo);
            }
            Rule::Table(table)
        }
        "builtin" => {
            let name = doc
                .builtin
                .as_deref()
                .ok_or_else(|| Error::Precondition("builtin kind without builtin field".into()))?;
            match name {
                "identity" => Rule::Identity,
                "min-collapse" => Rule::MinCollapse,
                "dfnl-min-field" => Rule::DfnlDerived(Dfnl::MinField),
                "dfnl-bef" => {
                    let text = doc.bef.as_deref().ok_or_else(|| {
                        Error::Precondition("dfnl-bef builtin without bef field".into())
                    })?;
                    Rule::DfnlDerived(crate::dfnl::dfnl_from_bef(parse_bef(text)?)?)
                }
                "lex-lift" => {
                    let inner = doc.inner.as_deref().ok_or_else(|| {
                        Error::Precondition("lex-lift builtin without inner field".into())
                    })?;
                    Rule::LexLift(Box::new(from_doc(inner)?))
                }
                other => {
                    return Err(Error::Precondition(format!("unknown builtin rule {other}")))
                }
            }
        }
        other => return Err(Error::Precondition(format!("unknown instance kind {other}"))),
    };
    FunctionAssignment::new(doc.arity, ground, rule)
}

/// Serialize an assignment to its canonical instance document (JSON).
pub fn to_instance_json(u: &FunctionAssignment) -> String {
    serde_json::to_string_pretty(&to_doc(u)).expect("instance documents always serialize")
}

/// Parse an instance document.
pub fn from_instance_json(text: &str) -> Result<FunctionAssignment> {
    let doc: InstanceDoc = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        col: e.column(),
        msg: e.to_string(),
    })?;
    from_doc(&doc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ground1(n: u64) -> TupleSet {
        TupleSet::new(1, (0..n).map(Tuple::scalar)).unwrap()
    }

    #[test]
    fn identity_is_total_everywhere() {
        let u = FunctionAssignment::new(1, ground1(3), Rule::Identity).unwrap();
        for a in u.ground.clone().subsets() {
            let e = u.apply(&a).unwrap();
            for x in a.iter() {
                assert_eq!(e.apply(x).unwrap(), x);
            }
        }
    }

    #[test]
    fn min_collapse_sends_everything_to_the_least_member() {
        let u = FunctionAssignment::new(1, ground1(4), Rule::MinCollapse).unwrap();
        let a = TupleSet::new(1, [Tuple::scalar(1), Tuple::scalar(3)]).unwrap();
        let e = u.apply(&a).unwrap();
        assert_eq!(e.apply(&Tuple::scalar(3)).unwrap(), &Tuple::scalar(1));
        assert_eq!(e.apply(&Tuple::scalar(1)).unwrap(), &Tuple::scalar(1));
    }

    #[test]
    fn carrier_escape_rejected() {
        let carrier = TupleSet::new(1, [Tuple::scalar(0)]).unwrap();
        let graph: BTreeMap<Tuple, Tuple> =
            [(Tuple::scalar(0), Tuple::scalar(5))].into_iter().collect();
        assert!(matches!(
            Endomorphism::new(carrier, graph),
            Err(Error::CarrierEscape { .. })
        ));
    }

    #[test]
    fn partial_table_rejected() {
        let g = ground1(2);
        let mut table = BTreeMap::new();
        table.insert(TupleSet::empty(1), Endomorphism::identity(TupleSet::empty(1)));
        assert!(matches!(
            FunctionAssignment::new(1, g, Rule::Table(table)),
            Err(Error::TableGap(_))
        ));
    }

    #[test]
    fn dfnl_derived_stays_inside_the_carrier() {
        let fld: std::collections::BTreeSet<u64> = (0..3).collect();
        let ground = TupleSet::cartesian_power(&fld, 2);
        let u = dfnl_assignment(Dfnl::MinField, ground.clone()).unwrap();
        for a in ground.subsets() {
            let e = u.apply(&a).unwrap();
            for x in a.iter() {
                assert!(a.contains(e.apply(x).unwrap()));
            }
        }
    }

    #[test]
    fn dfnl_derived_fixes_points_outside_the_complete_part() {
        let ground = TupleSet::new(2, [Tuple::new(vec![1, 2])]).unwrap();
        let u = dfnl_assignment(Dfnl::MinField, ground.clone()).unwrap();
        // (1,2) alone: the diagonal subset tuples are absent, so identity
        let e = u.apply(&ground).unwrap();
        assert_eq!(e.apply(&Tuple::new(vec![1, 2])).unwrap(), &Tuple::new(vec![1, 2]));
    }

    #[test]
    fn lex_lift_of_identity_is_identity() {
        let u = FunctionAssignment::new(1, ground1(3), Rule::Identity).unwrap();
        let v = lex_lift(u).unwrap();
        let a = TupleSet::new(2, [Tuple::new(vec![2, 2]), Tuple::new(vec![0, 1])]).unwrap();
        let e = v.apply(&a).unwrap();
        for x in a.iter() {
            assert_eq!(e.apply(x).unwrap(), x);
        }
    }

    #[test]
    fn lex_lift_moves_lifted_points_with_the_inner_assignment() {
        let u = FunctionAssignment::new(1, ground1(4), Rule::MinCollapse).unwrap();
        let v = lex_lift(u).unwrap();
        // A holds the lifts of 1 and 3; A' = {1,3}, U(A') collapses to 1
        let a = TupleSet::new(2, [Tuple::new(vec![1, 1]), Tuple::new(vec![3, 3])]).unwrap();
        let e = v.apply(&a).unwrap();
        assert_eq!(
            e.apply(&Tuple::new(vec![3, 3])).unwrap(),
            &Tuple::new(vec![1, 1])
        );
    }

    #[test]
    fn unlifted_points_are_fixed() {
        let u = FunctionAssignment::new(1, ground1(4), Rule::MinCollapse).unwrap();
        let v = lex_lift(u).unwrap();
        // (0,1) is not of the form (|x|, x) since |(1)| = 1 != 0
        let a = TupleSet::new(2, [Tuple::new(vec![0, 1])]).unwrap();
        let e = v.apply(&a).unwrap();
        assert_eq!(e.apply(&Tuple::new(vec![0, 1])).unwrap(), &Tuple::new(vec![0, 1]));
    }

    #[test]
    fn instance_round_trip_builtin() {
        let u = FunctionAssignment::new(1, ground1(3), Rule::MinCollapse).unwrap();
        let text = to_instance_json(&u);
        let back = from_instance_json(&text).unwrap();
        assert_eq!(back, u);
        assert_eq!(to_instance_json(&back), text);
    }

    #[test]
    fn instance_round_trip_table() {
        let g = ground1(2);
        let mut table = BTreeMap::new();
        for a in g.subsets() {
            table.insert(a.clone(), Endomorphism::identity(a));
        }
        let u = FunctionAssignment::new(1, g, Rule::Table(table)).unwrap();
        let text = to_instance_json(&u);
        let back = from_instance_json(&text).unwrap();
        assert_eq!(back, u);
        assert_eq!(to_instance_json(&back), text);
    }

    #[test]
    fn instance_round_trip_lex_lift_of_bef() {
        let b = parse_bef("bef q=2 t=1 r=1 : f1 < x1").unwrap();
        let h = crate::dfnl::dfnl_from_bef(b).unwrap();
        let u = dfnl_assignment(h, ground1(3)).unwrap();
        let v = lex_lift(u).unwrap();
        let text = to_instance_json(&v);
        let back = from_instance_json(&text).unwrap();
        assert_eq!(back, v);
        assert_eq!(to_instance_json(&back), text);
    }
}
