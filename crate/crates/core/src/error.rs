use thiserror::Error;

/// Errors raised by the simulation and verification routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("element count must be a positive even integer, got {0}")]
    OddElementCount(usize),
    #[error("element count must be at least {min}, got {got}")]
    TooFewElements { min: usize, got: usize },
    #[error("element index {index} out of range 1..={n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("chi must lie in [0, 1], got {0}")]
    ChiOutOfRange(f64),
    #[error("Rician factor must be finite and nonnegative, got {0}")]
    InvalidRicianFactor(f64),
    #[error("transmit power must be positive, got {0}")]
    InvalidTxPower(f64),
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("phase list has {got} entries, expected {expected}")]
    PhaseListLength { expected: usize, got: usize },
    #[error("invalid architecture: {0}")]
    InvalidArchitecture(String),
    #[error("vector norm must be 1 within 1e-12, got {0}")]
    NotUnitVector(f64),
    #[error("pair count {n} out of range 0..={max}")]
    PairCountOutOfRange { n: usize, max: usize },
    #[error("no closed-form law for this scenario: {0}")]
    NoClosedForm(String),
    #[error("{n} elements is too many for exhaustive enumeration (limit {limit})")]
    TooLargeForEnumeration { n: usize, limit: usize },
    #[error("complexity budget {budget} is below the element count {n}")]
    BudgetTooSmall { budget: usize, n: usize },
    #[error("invalid matching: {0}")]
    InvalidMatching(String),
    #[error("trial count must be at least 1")]
    NoTrials,
}

pub type Result<T> = std::result::Result<T, Error>;
