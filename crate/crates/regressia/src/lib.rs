//! A desk-scale laboratory for the finite combinatorics of regressive
//! values: order types, decreasing function assignments, bounded existential
//! formulas, recursion on the sup norm, and budgeted witness searches.

pub mod assignment;
pub mod bef;
pub mod closure;
pub mod completions;
pub mod decreasing;
pub mod dfnl;
pub mod error;
pub mod order_type;
pub mod orders;
pub mod ramsey;
pub mod regressive;
pub mod regular;
pub mod tuple;
pub mod witness;

pub use error::{Error, Result};
