use thiserror::Error;

use crate::tuple::Tuple;

#[derive(Debug, Error)]
pub enum Error {
    #[error("arity mismatch: expected {expected}, got {got}")]
    ArityMismatch { expected: usize, got: usize },

    #[error("missing key {0}")]
    MissingKey(Tuple),

    #[error("budget exceeded: {task} needs {needed} candidates, cap is {cap}")]
    Budget {
        task: &'static str,
        needed: u128,
        cap: u128,
    },

    #[error("order is not irreflexive: {0} < {0}")]
    NotIrreflexive(Tuple),

    #[error("order is not transitive: {0} < {1} < {2} but not {0} < {2}")]
    NotTransitive(Tuple, Tuple, Tuple),

    #[error("table assignment has no entry for a {0}-element subset")]
    TableGap(usize),

    #[error("endomorphism value {value} escapes its carrier at {key}")]
    CarrierEscape { key: Tuple, value: Tuple },

    #[error("functional contract violated at {x}: value {value} outside fld(f) and coords")]
    ContractViolation { x: Tuple, value: u64 },

    #[error("input is not regressive: F({0:?}) = {1} with min {2}")]
    NotRegressive(Vec<u64>, u64, u64),

    #[error("set is not closed: {0} missing although {1} is a member")]
    NotClosed(Tuple, Tuple),

    #[error("assignment is not order invariant; violating pair found")]
    NotOrderInvariant,

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("parse error at line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
