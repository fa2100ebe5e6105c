use thiserror::Error;

/// Errors raised by the solver library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("length mismatch: expected {expected}, got {actual} ({what})")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("meshes are not nested: {coarse} cells does not divide {fine} cells")]
    NotNested { coarse: usize, fine: usize },

    #[error("divisibility violated: {factor} does not divide {total}")]
    Divisibility { factor: usize, total: usize },

    #[error("eigensolver did not converge while computing {count} eigenpairs (first unconverged index {index})")]
    EigenNonConvergence { count: usize, index: usize },

    #[error("linear solve failed at row {row}: pivot {pivot}")]
    Singular { row: usize, pivot: f64 },

    #[error("history overflow: step {step} exceeds the {k_steps} configured steps")]
    HistoryOverflow { step: usize, k_steps: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("malformed path dump: {0}")]
    Decode(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    /// True for errors caused by user input (bad config, malformed files,
    /// invalid parameters) rather than by a numerical breakdown.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Domain(_)
                | Error::LengthMismatch { .. }
                | Error::NotNested { .. }
                | Error::Divisibility { .. }
                | Error::Config(_)
                | Error::Decode(_)
                | Error::Json(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
