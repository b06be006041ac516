use thiserror::Error;

use crate::tableau::BoxIndex;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("size {n} is outside the supported range {min}..={max} for {what}")]
    SizeOutOfRange {
        what: &'static str,
        n: usize,
        min: usize,
        max: usize,
    },
    #[error("box {0} lies outside the staircase of size {1}")]
    BoxOutOfShape(BoxIndex, usize),
    #[error("row {row} has {found} cells, expected {expected}")]
    Shape {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("deleting row {row} and column {col} from a size-{n} tableau does not leave a staircase")]
    InvalidDeletion { row: usize, col: usize, n: usize },
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid rational {0:?}: expected an integer or p/q")]
    BadRational(String),
    #[error("invalid weights: {0}")]
    InvalidWeights(String),
    #[error("invalid index tuple: {0}")]
    InvalidTuple(String),
    #[error("conflicting requirements for box {0}")]
    ConflictingConstraint(BoxIndex),
    #[error("prefix has zero continuation weight")]
    InconsistentPrefix,
    #[error("prefix of length {0} exceeds the number of boxes")]
    PrefixTooLong(usize),
    #[error("moment index {r} exceeds the allowed maximum {max}")]
    MomentOutOfRange { r: usize, max: usize },
    #[error("factorial moment vector is not terminated (last entry must be zero)")]
    UnterminatedMoments,
    #[error("moment inversion produced a negative mass at k={0}")]
    NegativeMass(usize),
    #[error("statistic {stat} cannot be compared with Pois({lambda})")]
    MismatchedLimit { stat: String, lambda: String },
    #[error("unknown sampling method {0:?} (expected enum_alias or chain_rule)")]
    UnknownMethod(String),
    #[error("unknown statistic {0:?}")]
    UnknownStatistic(String),
    #[error("invalid probability mass function: {0}")]
    InvalidPmf(String),
    #[error("weights too large for an exact integer table at size {0}")]
    WeightOverflow(usize),
    #[error("invalid ASEP parameters: {0}")]
    InvalidRates(String),
    #[error("the Markov chain is reducible (kernel dimension {0})")]
    Reducible(usize),
    #[error("no samples requested")]
    NoSamples,
    #[error("internal consistency check failed: {0}")]
    Internal(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
