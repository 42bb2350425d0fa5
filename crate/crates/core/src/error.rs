use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("empty sample vector")]
    EmptySamples,

    #[error("insufficient samples for Catoni: n = {n} must exceed 2 ln(1/delta) = {bound:.4}")]
    InsufficientCatoniSamples { n: usize, bound: f64 },

    #[error("insufficient samples: n = {n} must exceed 2 ln(2d/delta) = {bound:.4}")]
    InsufficientSamples { n: usize, bound: f64 },

    #[error("insufficient samples for warm-up: each half of n0 = {n0} must exceed {bound:.4}")]
    InsufficientWarmup { n0: usize, bound: f64 },

    #[error("covariance not invertible")]
    SingularCovariance,

    #[error("design does not span the space")]
    DesignNotSpanning,

    #[error("cannot attain finite H^2: arm set does not span R^{0}")]
    InfiniteHSquared(usize),

    #[error("C_min = 0; set does not span R^{0}")]
    ZeroCMin(usize),

    #[error("oracle scale exceeded: d = {d}, s = {s} (limits d <= 8, s <= 3)")]
    OracleScaleExceeded { d: usize, s: usize },

    #[error("arm index {index} out of range for {arms} arms")]
    ArmOutOfRange { index: usize, arms: usize },

    #[error("horizon too short for support recovery phase: n = {n}, n2 = {n2}")]
    HorizonTooShort { n: usize, n2: usize },

    #[error("unknown instance case: {0}")]
    UnknownCase(String),
}
