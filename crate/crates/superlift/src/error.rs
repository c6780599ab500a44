use thiserror::Error;

/// Errors raised by the algebra, function and map layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("generator counts differ: {0} vs {1}")]
    GeneratorMismatch(usize, usize),
    #[error("generator count {0} exceeds the supported maximum {1}")]
    TooManyGenerators(usize, usize),
    #[error("body {0:e} is below the invertibility tolerance")]
    ZeroBody(f64),
    #[error("parity violation: {0}")]
    Parity(String),
    #[error("domain violation: {0}")]
    DomainViolation(String),
    #[error("body vanishes on the sample circle (min |f_B| = {0:e})")]
    BodyVanishes(f64),
    #[error("no square root: {0}")]
    NoSquareRoot(String),
    #[error("unsupported composition: {0}")]
    UnsupportedComposition(String),
    #[error("unsupported body: {0}")]
    UnsupportedBody(String),
    #[error("not invertible: {0}")]
    NonInvertible(String),
    #[error("coefficient outside the allowed subalgebra: {0}")]
    CoefficientMask(String),
    #[error("degree bound exceeded: {0}")]
    DegreeBoundExceeded(String),
    #[error("obstructed at level {level}: uncovered powers {powers:?}")]
    Obstructed { level: String, powers: Vec<i32> },
    #[error("inconsistent theta type: {0}")]
    InconsistentType(String),
    #[error("outside domain: {0}")]
    OutsideDomain(String),
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error("{path}: {message}")]
    Schema { path: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn schema(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Schema { path: path.into(), message: message.into() }
    }
}
