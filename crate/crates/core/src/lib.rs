//! Class numbers of real quadratic fields, a conjectural model of their
//! distribution over `Q(sqrt p)`, and the machinery to compare the two.

pub mod arith;
pub mod classnum;
pub mod error;
pub mod experiment;
pub mod heuristic;
pub mod store;

pub use error::{Error, Result};
