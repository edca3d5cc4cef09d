use thiserror::Error;

/// Errors raised by the library. Each variant maps to one CLI exit class.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("point is not on the curve (residual {residual:e})")]
    NotOnCurve { residual: f64 },
    #[error("degenerate configuration: {0}")]
    Degenerate(String),
    #[error("pole on integration path: {0}")]
    PoleOnPath(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("inconclusive: {0}")]
    Inconclusive(String),
    #[error("not implemented: {0}")]
    NotImplemented(String),
}

impl Error {
    /// Coarse class used for process exit codes.
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::InvalidInput(_)
            | Error::NotOnCurve { .. }
            | Error::Degenerate(_)
            | Error::NotImplemented(_) => ErrorClass::Config,
            Error::PoleOnPath(_) | Error::Numerical(_) => ErrorClass::Numerical,
            Error::Inconclusive(_) => ErrorClass::Inconclusive,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Numerical,
    Inconclusive,
}

pub type Result<T> = std::result::Result<T, Error>;
