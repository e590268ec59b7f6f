use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("row {0} has (near) zero norm")]
    ZeroRow(usize),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("unsupported Matrix Market format: {0}")]
    UnsupportedFormat(String),

    #[error("lambda {lambda} outside [0, {max}]")]
    InvalidLambda { lambda: f64, max: f64 },

    #[error("cycle length must be at least 1")]
    InvalidCycle,

    #[error("conjugate gradient breakdown at iteration {0}: direction curvature underflow")]
    Breakdown(usize),

    #[error("initial residual {0:e} is already at the convergence floor")]
    DegenerateResiduals(f64),

    #[error("iteration budget {0} is too small (need at least {1})")]
    InvalidBudget(usize, usize),

    #[error("generated matrix has no nonzero rows")]
    EmptyMatrix,

    #[error("matrix is too large for the dense oracle ({rows}x{cols}, limit {limit})")]
    TooLarge {
        rows: usize,
        cols: usize,
        limit: usize,
    },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("system is inconsistent: residual {0:e} after projection")]
    Inconsistent(f64),

    #[error("spectral data is required: {0}")]
    MissingSpectral(&'static str),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{solver} failed (seed {seed})")]
    Run {
        solver: String,
        seed: u64,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures caused by the numerics rather than by bad input.
    pub fn is_numerical(&self) -> bool {
        if let Error::Run { source, .. } = self {
            return source.is_numerical();
        }
        matches!(
            self,
            Error::Breakdown(_)
                | Error::DegenerateResiduals(_)
                | Error::NumericalFailure(_)
                | Error::Inconsistent(_)
        )
    }
}
