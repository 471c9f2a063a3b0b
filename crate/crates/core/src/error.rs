use thiserror::Error;

/// Errors raised by the toolkit's operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid curve: {0}")]
    InvalidCurve(String),

    #[error("scale must be positive, got {0}")]
    InvalidScale(f64),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("generation {k} outside the configured window [{k_min}, {k_max}]")]
    GenerationOutOfRange { k: i32, k_min: i32, k_max: i32 },

    #[error("cube at generation {0} has no parent inside the configured window")]
    NoParent(i32),

    #[error("grid window [{0}, {1}] has no parent relations")]
    DegenerateWindow(i32, i32),

    #[error("empty annulus: inner radius {inner} is not below outer radius {outer}")]
    EmptyAnnulus { inner: f64, outer: f64 },

    #[error("unsupported variation exponent {0}; the dynamic program needs r >= 1")]
    UnsupportedExponent(f64),

    #[error("empty input sequence")]
    EmptySequence,

    #[error("configuration error: {0}")]
    Config(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("construction failed: {reason}; measure trace {trace:?}")]
    ConstructionFailure {
        reason: String,
        trace: Vec<(f64, u64)>,
    },

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
