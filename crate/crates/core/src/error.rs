use thiserror::Error;

/// Errors raised by the toolkit. Each variant maps onto one failure class
/// the command-line driver reports with a stable exit code.
#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: expected {expected} values, got {got}")]
    Shape { expected: usize, got: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("no bracket found for the Luxemburg norm after {0} expansions")]
    NumericalRange(usize),

    #[error("closed form unavailable: the a-weighted q-moment vanishes, use the L^p norm")]
    FallbackRequired,

    #[error("degenerate exponents: p = q = {0}")]
    DegenerateExponent(f64),

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("contract violated: {0}")]
    Contract(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures caused by the inputs rather than by the numerics.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Shape { .. }
                | Error::Domain(_)
                | Error::Geometry(_)
                | Error::Contract(_)
                | Error::Invalid(_)
                | Error::DegenerateExponent(_)
                | Error::Csv(_)
                | Error::Json(_)
                | Error::Io(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
