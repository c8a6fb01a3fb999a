//! Exact inference in discrete Bayesian networks by junction-tree
//! propagation: HUGIN, Shafer-Shenoy and lazy propagation, with a brute-force
//! oracle, a text format and a benchmark harness.

pub mod bench;
pub mod compile;
pub mod engines;
pub mod error;
pub mod fixtures;
pub mod model;
pub mod oracle;
pub mod parser;

pub use compile::{compile, Heuristic, JunctionTree};
pub use engines::{propagate, EngineKind, Propagated, PropagationTrace};
pub use error::{Error, Result};
pub use model::{BayesianNetwork, Evidence, Factor, VarId};
