use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("{what} is outside its domain at {value}")]
    Domain { what: &'static str, value: f64 },

    #[error("no sign change on [{lo}, {hi}]: f(lo) = {f_lo}, f(hi) = {f_hi}")]
    NoSignChange {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },

    #[error("root finder did not converge within {iterations} iterations")]
    MaxIterations { iterations: usize },

    #[error("capital became non-positive ({k}) at step {step}")]
    PositivityViolation { step: usize, k: f64 },

    #[error("index {index} out of range for a path of {len} steps")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("{operation} does not support {capacity} capacity")]
    UnsupportedCapacity {
        operation: &'static str,
        capacity: &'static str,
    },

    #[error("moment level {needed} needed but the tower is truncated at {available}")]
    InsufficientTruncation { needed: usize, available: usize },

    #[error("unsupported expansion order {0} (only 0 and 1 are available)")]
    UnsupportedOrder(usize),

    #[error("{failed} of {total} paths failed, above the 1% tolerance")]
    TooManyFailures { failed: usize, total: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },
}
