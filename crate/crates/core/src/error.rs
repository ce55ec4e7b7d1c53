use thiserror::Error;

/// Errors reported by the solvers. Numerical payloads are stored as `f64`
/// so the type does not depend on the scalar parameter.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("field has length {found}, domain expects {expected}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("field contains a non-finite value at node {0}")]
    NonFinite(usize),

    #[error("field is off the unit L^p sphere (|norm - 1| = {deviation:e})")]
    OffSphere { deviation: f64 },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("sign path requires a nonzero positive part")]
    EmptyPositivePart,

    #[error("{what} did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged {
        what: String,
        iterations: usize,
        residual: f64,
    },

    #[error("descent left the positive cone: limit changes sign")]
    SignChangingLimit,

    #[error("saddle not resolved (gradient {grad_norm:e} at the path maximum); increase beads")]
    SaddleNotResolved { grad_norm: f64 },

    #[error("degenerate path: maximum {max:e} does not exceed lambda1 = {lambda1:e}")]
    DegeneratePath { max: f64, lambda1: f64 },

    #[error("sublevel set misses an endpoint: need b > {required:e}, got {b:e}")]
    EndpointNotInSublevel { b: f64, required: f64 },

    #[error("point ({a}, {b}) lies within {distance:e} of the computed spectrum (tolerance {tolerance:e})")]
    NearSpectrum {
        a: f64,
        b: f64,
        distance: f64,
        tolerance: f64,
    },

    #[error("query needs the curve at s = {needed:e}, traced range ends at {traced_max:e}")]
    Extrapolation { needed: f64, traced_max: f64 },

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("singular linear system")]
    Singular,

    #[error("serialization: {0}")]
    Serialization(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serialization(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Serialization(e.to_string())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Serialization(e.to_string())
    }
}
