use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("dimension {0} is out of range (1..=64)")]
    InvalidDimension(u32),

    #[error("code system must have at least one constituent code")]
    NoConstituents,

    #[error("constituent code {index} is empty")]
    EmptyCode { index: usize },

    #[error("codes[{code}][{position}]: value {value} does not fit in dimension {d}")]
    OutOfRange {
        code: usize,
        position: usize,
        value: u64,
        d: u32,
    },

    #[error("codes[{code}][{position}]: duplicate codeword {value}")]
    Duplicate { code: usize, position: usize, value: u64 },

    #[error("invalid coordinate permutation: {0}")]
    InvalidPermutation(String),

    #[error("enumeration of {needed} tuples exceeds the guard of {limit}")]
    GuardExceeded { needed: String, limit: u64 },

    #[error("dimension {d} is too large for this operation (limit {limit})")]
    DimensionTooLarge { d: u64, limit: u64 },

    #[error("constituent {index} is empty under the chosen parameters")]
    EmptyConstituent { index: usize },

    #[error("expected {expected} band widths, got {got}")]
    ParamCount { expected: usize, got: usize },

    #[error("tensor power must be at least 1")]
    ZeroPower,

    #[error("first constituent has average weight exactly d/2; the construction cannot improve it")]
    BalancedSeed,

    #[error("first constituent has average weight above d/2; normalize the system first")]
    NotNormalized,

    #[error("weight separation failed: A-side max {a_max} >= B-side min {b_min}")]
    SeparationFailed { a_max: String, b_min: String },

    #[error("logarithm of zero")]
    LogOfZero,

    #[error("no admissible parameter point in the search space")]
    NoAdmissiblePoint,

    #[error("invalid search configuration: {0}")]
    InvalidConfig(String),

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("distribution has zero variance")]
    ZeroVariance,

    #[error("invalid discovery sizes: {0}")]
    InvalidSizes(String),

    #[error("unknown catalog entry `{name}`; valid names: {valid}")]
    UnknownCatalog { name: String, valid: String },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
