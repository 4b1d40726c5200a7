use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{op}: shape mismatch between {lhs:?} and {rhs:?}")]
    Shape {
        op: &'static str,
        lhs: Vec<usize>,
        rhs: Vec<usize>,
    },

    #[error("{op}: non-finite value in input")]
    NonFinite { op: &'static str },

    #[error("backward requires a scalar loss, got shape {shape:?}")]
    NotScalar { shape: Vec<usize> },

    #[error("no gradient supplied for parameter `{name}`")]
    MissingGradient { name: String },

    #[error("matrix is not symmetric (max asymmetry {max_asymmetry:e})")]
    Asymmetric { max_asymmetry: f64 },

    #[error("grid extent {extent} is not a power of two >= 2")]
    NotPowerOfTwo { extent: usize },

    #[error("grid of {points} points exceeds the dense covariance limit of {limit}")]
    GridTooLarge { points: usize, limit: usize },

    #[error("explicit step unstable: diffusivity*dt/dx^2 = {ratio:.6} exceeds {limit}")]
    Unstable { ratio: f64, limit: f64 },

    #[error("config error at line {line}, column {column}: {message}")]
    Config {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("missing artifact: expected {}", path.display())]
    MissingArtifact { path: PathBuf },

    #[error("container error at byte offset {offset}: {message}")]
    Container { offset: u64, message: String },

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("{0}")]
    Invalid(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config {
            line: 0,
            column: 0,
            message: msg.into(),
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } => 2,
            Error::MissingArtifact { .. } => 3,
            Error::Numeric(_) | Error::NonFinite { .. } => 4,
            _ => 1,
        }
    }
}
