use thiserror::Error;

use crate::model::VarId;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Factor operands do not fit together (cardinality clash, missing variable, bad table size).
    #[error("structural error: {0}")]
    Structural(String),

    /// A nonzero entry was divided by zero. Evidence contradicts an earlier message.
    #[error("inconsistent division: {numerator} / 0")]
    Inconsistent { numerator: f64 },

    #[error("CPD of {child} does not sum to 1 at tail configuration {tail:?} (sum = {sum})")]
    NotNormalized {
        child: VarId,
        tail: Vec<(VarId, usize)>,
        sum: f64,
    },

    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid network: {0}")]
    Network(String),

    #[error("invalid evidence: {0}")]
    Evidence(String),

    #[error("evidence has zero probability")]
    ImpossibleEvidence,

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error(
        "running intersection violated: cliques {first} and {second} share {missing}, \
         which is missing from {at} on the path between them"
    )]
    RunningIntersection {
        first: usize,
        second: usize,
        missing: VarId,
        at: String,
    },

    #[error("invalid junction tree: {0}")]
    JunctionTree(String),

    #[error("message scheduling error: {0}")]
    Schedule(String),

    #[error("joint state space of {cells} cells exceeds the enumeration cap of {cap}")]
    OracleCap { cells: u128, cap: u128 },

    #[error("invalid argument: {0}")]
    Argument(String),
}
