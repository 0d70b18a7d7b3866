use thiserror::Error;

/// Errors raised by the partition, sampler and kernel routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("partition parts must be positive, found {0}")]
    NonPositivePart(i64),
    #[error("partition parts must be weakly decreasing (part {index} = {value} exceeds its predecessor)")]
    NotDecreasing { index: usize, value: u32 },
    #[error("cannot parse partition from {0:?}")]
    Parse(String),
    #[error("argument out of domain: {0}")]
    Domain(String),
    #[error("n = {n} exceeds the limit {limit} for {what}")]
    TooLarge { what: &'static str, n: u64, limit: u64 },
    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),
    #[error("duplicate point {0} in correlation function arguments")]
    DuplicatePoint(i64),
    #[error("insufficient data: need at least {need}, got {got}")]
    InsufficientData { need: usize, got: usize },
    #[error("kernel truncation budget exhausted (cutoff {cutoff}, tail bound {tail:e})")]
    CutoffBudget { cutoff: i64, tail: f64 },
    #[error("matrix is not positive semidefinite (min eigenvalue {0:e})")]
    NotPositiveSemidefinite(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
