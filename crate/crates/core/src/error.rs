use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid range: lo ({lo}) must be strictly below hi ({hi})")]
    InvalidRange { lo: f64, hi: f64 },

    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("cannot rescale a matrix with zero spectral radius")]
    CannotRescale,

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid hyperparameter: {0}")]
    InvalidConfig(String),

    #[error("iteration did not converge: {0}")]
    Convergence(String),

    #[error("non-finite reservoir state in layer {layer} at step {step}")]
    NumericOverflow { layer: usize, step: usize },

    #[error("washout ({washout}) consumes all {steps} steps, no features left")]
    EmptyFeatures { washout: usize, steps: usize },

    #[error("target is constant, normalized error is undefined")]
    UndefinedNormalization,

    #[error("integration failed: {0}")]
    Integration(String),

    #[error("series generation failed: {0}")]
    Generation(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("every trial failed, no viable configuration")]
    NoViableConfig,

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Short machine-readable tag, used by the CLI error payload.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidRange { .. } => "invalid_range",
            Error::InvalidDimension(_) => "invalid_dimension",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::NotSquare { .. } => "not_square",
            Error::CannotRescale => "cannot_rescale",
            Error::InvalidInput(_) => "invalid_input",
            Error::InvalidConfig(_) => "invalid_config",
            Error::Convergence(_) => "convergence",
            Error::NumericOverflow { .. } => "numeric_overflow",
            Error::EmptyFeatures { .. } => "empty_features",
            Error::UndefinedNormalization => "undefined_normalization",
            Error::Integration(_) => "integration",
            Error::Generation(_) => "generation",
            Error::InsufficientData(_) => "insufficient_data",
            Error::Parse { .. } => "parse",
            Error::Io { .. } => "io",
            Error::NoViableConfig => "no_viable_config",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
        }
    }
}

pub(crate) fn check_dim(context: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            context,
            expected,
            found,
        })
    }
}
