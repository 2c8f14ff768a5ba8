use thiserror::Error;

/// Errors raised by the library. Divergent integrals are not errors; they are
/// reported through explicit enum states on the result types.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parameter out of domain: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("coefficient is not positive at r = {r}: a = {value}")]
    Ellipticity { r: f64, value: f64 },

    #[error("linear solver failed: {0}")]
    Solver(String),

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("family construction failed: {0}")]
    Family(String),

    #[error("precondition violated: {0}")]
    Precondition(String),
}

impl Error {
    /// Stable snake-case name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Parameter(_) => "parameter",
            Error::Ellipticity { .. } => "ellipticity",
            Error::Solver(_) => "solver",
            Error::Quadrature(_) => "quadrature",
            Error::InsufficientData(_) => "insufficient_data",
            Error::Family(_) => "family",
            Error::Precondition(_) => "precondition",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
