use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported dimension d = {0}: an explicit harmonic basis exists only for d = 2 and d = 3")]
    UnsupportedDimension(usize),

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("unknown design `{0}`")]
    UnknownDesign(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("design fails quadrature exactness at degree {degree} (residual {residual:.3e}, worst {worst_residual:.3e} at degree {worst_degree})")]
    DesignVerification {
        degree: usize,
        residual: f64,
        worst_degree: usize,
        worst_residual: f64,
    },

    #[error("design strength {available} is insufficient: {required} required")]
    InsufficientStrength { required: usize, available: usize },

    #[error("weight is not positive at t = {0}")]
    NonPositiveWeight(f64),

    #[error("symmetric eigen-solver exceeded its iteration cap")]
    EigenNonConvergence,

    #[error("grid side {side} is too small for {scales} scales (need at least {required})")]
    ShapeTooSmall {
        side: usize,
        scales: usize,
        required: usize,
    },

    #[error("discrete partition of unity violated (residual {0:.3e})")]
    PartitionViolation(f64),

    #[error("shape mismatch: expected {expected:?}, found {found:?}")]
    ShapeMismatch { expected: Vec<usize>, found: Vec<usize> },

    #[error("signal contains non-finite samples")]
    NonFinite,

    #[error("pyramid does not match frame: {0}")]
    ManifestMismatch(String),

    #[error("matrix is not a proper rotation (residual {0:.3e})")]
    NotARotation(f64),

    #[error("bank is not suitable: {0}")]
    BankKind(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn file(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::File {
            path: path.into(),
            source,
        }
    }
}
