use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("graph generation failed after {retries} restarts: {reason}")]
    GenerationFailure { retries: usize, reason: String },

    #[error("product dimension {dim} exceeds the size cap {cap}")]
    SizeCap { dim: usize, cap: usize },

    #[error("numerical failure on {0}")]
    NumericalFailure(String),

    #[error("sample {index}: {source}")]
    Sample {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    /// Strips [`Error::Sample`] wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Sample { source, .. } => source.root(),
            e => e,
        }
    }

    /// True for errors caused by bad parameters or inputs rather than by the computation.
    pub fn is_validation(&self) -> bool {
        matches!(
            self.root(),
            Error::InvalidParameter(_) | Error::InvalidInput(_) | Error::SizeCap { .. } | Error::Json(_)
        )
    }
}
