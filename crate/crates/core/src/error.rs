use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid parameter for {family}: {reason}")]
    InvalidParameter { family: &'static str, reason: String },

    #[error("no base station in the snapshot; nothing to associate with")]
    EmptySnapshot,

    #[error("unsupported array size ({n_tx}, {n_rx}); published tables cover 4, 16, 64 and 256 elements")]
    UnsupportedSize { n_tx: usize, n_rx: usize },

    #[error("quadrature did not converge: value {value:e}, error estimate {error:e}")]
    NonConvergence { value: f64, error: f64 },

    #[error("degenerate sample set: {0}")]
    DegenerateSamples(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn param(family: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { family, reason: reason.into() }
    }

    /// True for numeric-convergence failures (as opposed to bad input).
    pub fn is_numeric(&self) -> bool {
        matches!(self, Error::NonConvergence { .. })
    }
}
