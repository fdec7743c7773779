//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("empty coefficient map")]
    EmptyCoeffMap,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid dilation matrix: {0}")]
    InvalidDilation(String),

    #[error("every thread has a single element: the angular variance is infinite on this support")]
    InfiniteVariance,

    #[error("mask coverage violation at {point:?}, level {level}")]
    CoverageViolation { point: Vec<i64>, level: u32 },

    #[error("level {0} is outside the verified operating range (max {1})")]
    LevelOutOfRange(u32, u32),

    #[error("compute budget exceeded: {touched} lattice points requested, cap is {cap}")]
    BudgetExceeded { touched: u64, cap: u64 },

    #[error("serialization: {0}")]
    Serialization(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
