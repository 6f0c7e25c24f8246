//! Error type shared by every module of the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A matrix or distribution was built with an unusable dimension.
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    /// A state violates a structural invariant (Hermiticity, positivity,
    /// real-valuedness) beyond tolerance.
    #[error("corrupted state: {0}")]
    CorruptedState(String),

    /// Input to the dynamics carries too much population at the truncation
    /// boundary for the result to be trusted.
    #[error("truncation leakage {leakage:.3e} exceeds limit {limit:.3e}")]
    TruncationLeakage { leakage: f64, limit: f64 },

    /// A number distribution has too few entries for the requested order.
    #[error("distribution too short: need at least {needed} entries, have {len}")]
    DistributionTooShort { needed: usize, len: usize },

    /// Klyshko ratio P0*P2/P1^2 with a vanishing denominator but non-zero
    /// numerator.
    #[error("undefined Klyshko ratio: P1 = 0 while P0*P2 > 0")]
    UndefinedRatio,

    /// The symmetric eigensolver failed to converge; `block` identifies the
    /// partial-transpose difference block (or -1 for a standalone solve).
    #[error("eigensolver did not converge (block {block})")]
    EigenNonConvergence { block: i64 },

    /// Number filter removed essentially all population.
    #[error("empty filter: surviving trace {trace:.3e} below threshold")]
    EmptyFilter { trace: f64 },

    /// Klyshko order outside the measured population window.
    #[error("order {order} not measurable with {measured} populations")]
    UnmeasurableOrder { order: usize, measured: usize },

    /// A scalar parameter is outside its documented range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A sweep request is inconsistent or incomplete.
    #[error("invalid sweep spec: {0}")]
    InvalidSpec(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}
