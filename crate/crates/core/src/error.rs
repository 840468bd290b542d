use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("particles {first} and {second} share the same position")]
    DuplicatePosition { first: usize, second: usize },

    #[error("weight {index} is not positive ({value})")]
    NonpositiveWeight { index: usize, value: f64 },

    #[error("weight {index} vanished during initialisation; is the particle outside the support?")]
    ZeroWeight { index: usize },

    #[error("length mismatch: {what}")]
    LengthMismatch { what: String },

    #[error("need at least 2 particles, got {0}")]
    TooFewParticles(usize),

    #[error("unsupported spatial dimension {0} (expected 1 or 2)")]
    UnsupportedDimension(usize),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("softmin input {index} is not positive ({value})")]
    NonpositiveInput { index: usize, value: f64 },

    #[error("softmin needs at least one finite entry")]
    AllInfinite,

    #[error("particles {first} and {second} (nearly) coincide")]
    CoincidentParticles { first: usize, second: usize },

    #[error("particle ordering broken between {first} and {second}")]
    OrderingViolated { first: usize, second: usize },

    #[error("argument outside domain: {0}")]
    DomainError(String),

    #[error("quantile is unbounded at {0}")]
    UnboundedQuantile(f64),

    #[error("profile has no closed-form quantile function: {0}")]
    QuantileUnavailable(&'static str),

    #[error("systems have different weights")]
    WeightMismatch,

    #[error("time step {dt} exceeds the stability ceiling {limit}")]
    CflExceeded { dt: f64, limit: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("not enough data: {0}")]
    InsufficientData(String),
}
