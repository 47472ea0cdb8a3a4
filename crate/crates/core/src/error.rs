use thiserror::Error;

/// Errors raised by the geometry, estimation and embedding routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("not implemented: {0}")]
    NotImplemented(String),

    #[error("{what} out of range: {detail}")]
    OutOfRange { what: &'static str, detail: String },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A homothety class needs a body of dimension at least two.
    #[error("degenerate class: {0}")]
    DegenerateClass(String),

    #[error("inconsistent inputs: {0}")]
    InconsistentInputs(String),

    #[error("numerical degeneracy: {0}")]
    NumericalDegeneracy(String),

    #[error("kernel is not of hyperbolic type: {0}")]
    NotHyperbolicType(String),

    #[error("zero samples requested")]
    ZeroSamples,

    #[error("csv: {0}")]
    Csv(String),
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Csv(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
