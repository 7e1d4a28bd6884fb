use std::path::PathBuf;

/// Errors produced by every chronofit operation.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("line {line}: {message}")]
    DateSequence { line: u64, message: String },

    #[error("{0}")]
    InvalidInput(String),

    #[error("value {value} at index {index} is outside the domain: {reason}")]
    Domain {
        index: usize,
        value: f64,
        reason: &'static str,
    },

    #[error("series too short: need at least {needed} observations, got {got}")]
    TooShort { needed: usize, got: usize },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("series has zero variance")]
    ConstantSeries,

    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("design matrix is rank deficient; dependent columns: {}", columns.join(", "))]
    RankDeficient { columns: Vec<String> },

    #[error("degenerate series: {0}")]
    Degenerate(String),

    #[error("estimated {polynomial} polynomial has a root on or inside the unit circle")]
    NonStationary { polynomial: &'static str },

    #[error("optimizer failed: {0}")]
    OptimizerFailed(String),

    #[error("every candidate order failed to fit")]
    AllCandidatesFailed,

    #[error("{0}")]
    Unsupported(String),

    #[error("regressor {name}: {source}")]
    Regressor {
        name: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// True for failures of the numerical machinery rather than of the input data.
    pub fn is_numerical(&self) -> bool {
        if let Error::Regressor { source, .. } = self {
            return source.is_numerical();
        }
        matches!(
            self,
            Error::RankDeficient { .. }
                | Error::Degenerate(_)
                | Error::NonStationary { .. }
                | Error::OptimizerFailed(_)
                | Error::AllCandidatesFailed
        )
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
