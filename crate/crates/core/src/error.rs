use thiserror::Error;

/// Errors shared across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not symmetric (max asymmetry {max_asym:e})")]
    NonSymmetric { max_asym: f64 },

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("matrix is singular (pivot {pivot:e} at index {index})")]
    SingularMatrix { pivot: f64, index: usize },

    #[error("graph is not connected")]
    DisconnectedGraph,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("time vector entry {index} is not finite")]
    InfiniteTimeEntry { index: usize },

    #[error("malformed grid: {0}")]
    MalformedGrid(String),

    #[error("coordinate {vertex} not absorbed by the end of the path")]
    Unabsorbed { vertex: usize },

    #[error("non-monotone clock on coordinate {vertex}")]
    NonMonotoneClock { vertex: usize },

    #[error("simulation left the admissible region at step {step}: {reason}")]
    SimulationAborted { step: usize, reason: String },

    #[error("quadrature supports at most {max} dimensions, got {got}")]
    QuadratureDimension { max: usize, got: usize },

    #[error("quadrature did not converge within budget (error estimate {estimate:e})")]
    QuadratureBudget { estimate: f64 },

    #[error("empty sample")]
    EmptySample,

    #[error("unknown suite id `{0}`")]
    UnknownSuite(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
