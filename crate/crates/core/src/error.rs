use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("point ({re}, {im}) is not inside the open unit disk")]
    OutsideDisk { re: f64, im: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("shadow undefined at origin")]
    ShadowAtOrigin,

    #[error("value {value} is outside the domain of the profile")]
    OutOfDomain { value: f64 },

    #[error("quadrature did not converge: estimate {estimate}, error estimate {error_estimate}")]
    Quadrature { estimate: f64, error_estimate: f64 },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("construction inapplicable: {0}")]
    Inapplicable(String),

    #[error("complexity guard: {0}")]
    Guard(String),

    #[error("calibration failed: {0}")]
    Calibration(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub fn kind(&self) -> &'static str {
        match self {
            Error::OutsideDisk { .. } => "outside_disk",
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::ShadowAtOrigin => "shadow_at_origin",
            Error::OutOfDomain { .. } => "out_of_domain",
            Error::Quadrature { .. } => "quadrature",
            Error::Precondition(_) => "precondition",
            Error::Inapplicable(_) => "inapplicable",
            Error::Guard(_) => "guard",
            Error::Calibration(_) => "calibration",
            Error::Io(_) => "io",
            Error::Parse(_) => "parse",
        }
    }

    /// Errors caused by the caller's input rather than by a numerical failure.
    pub fn is_precondition(&self) -> bool {
        !matches!(self, Error::Quadrature { .. } | Error::Calibration(_) | Error::Io(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
