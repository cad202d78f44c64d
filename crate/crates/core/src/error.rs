use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised by map evaluation, flow construction and integration.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("singular point: {what} vanishes ({value:e})")]
    SingularPoint { what: String, value: f64 },

    #[error("argument of logarithm `{what}` is not positive ({value:e})")]
    LogDomain { what: String, value: f64 },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("nambu bracket needs {expected} fields, got {got}")]
    Arity { expected: usize, got: usize },

    #[error("iterate {step} left the domain: {source}")]
    IterateDomain {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unsupported order m = {0}")]
    UnsupportedOrder(usize),

    #[error("index error: {0}")]
    Index(String),

    #[error("determinant condition fails at {failures} of {samples} sample points (max |d det J / d x_t| = {max_derivative:e})")]
    DetCondition {
        samples: usize,
        failures: usize,
        max_derivative: f64,
    },

    #[error("quadrature did not converge (estimated error {estimate:e})")]
    Quadrature { estimate: f64 },

    #[error("integration stopped at t = {t}: {reason}")]
    Integration {
        reason: String,
        t: f64,
        state: Vec<f64>,
    },

    #[error("unknown catalog map `{0}`")]
    UnknownMap(String),
}

impl Error {
    pub(crate) fn singular(what: impl Into<String>, value: f64) -> Self {
        Error::SingularPoint {
            what: what.into(),
            value,
        }
    }
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Dimension { expected, got })
    }
}

pub(crate) fn check_finite(what: &str, xs: &[f64]) -> Result<()> {
    if xs.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what.to_string()))
    }
}
