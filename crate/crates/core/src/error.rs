use thiserror::Error;

/// Validation and construction failures for distributions, matrices and systems.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CoreError {
    #[error("empty vector: a distribution needs at least one entry")]
    Empty,

    #[error("entry {index} is not a finite number ({value})")]
    NonFinite { index: usize, value: f64 },

    #[error("entry {index} is negative ({value})")]
    NegativeEntry { index: usize, value: f64 },

    #[error("entries sum to {sum}, not 1 (tolerance {tol:e})")]
    SumNotOne { sum: f64, tol: f64 },

    #[error("world event {index} has zero probability")]
    ZeroWorldEvent { index: usize },

    #[error("entry ({row}, {col}) = {value} lies outside [0, 1]")]
    EntryOutOfRange { row: usize, col: usize, value: f64 },

    #[error("row {row} sums to {sum}, not 1 (row-stochastic, tolerance {tol:e})")]
    NonStochastic { row: usize, sum: f64, tol: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not square: row {row} has {len} entries, expected {expected}")]
    NotSquare { row: usize, len: usize, expected: usize },

    #[error("expected a {expected} matrix, got a {found} matrix")]
    RoleMismatch { expected: &'static str, found: &'static str },

    #[error("referent {referent} cannot be produced by the decoder of agent '{agent}' (world-coverage check)")]
    UncoveredReferent { agent: String, referent: usize },

    #[error("population has {0} agents, at least 2 are required")]
    PopulationTooSmall(usize),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;
