use serde::Serialize;
use thiserror::Error;

/// Every failure the library can report.
///
/// `kind()` gives a stable machine-readable tag used in structured error output.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("modulus {0} is not a prime >= 2")]
    NotPrime(usize),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
    #[error("dilation factor {0} is zero modulo N")]
    InvalidDilation(i64),
    #[error("expectation over an empty set")]
    EmptyDomain,
    #[error("coefficient {index} has modulus {modulus} > 1")]
    InvalidCoefficient { index: usize, modulus: f64 },
    #[error("numerical inconsistency: {0}")]
    NumericalInconsistency(String),
    #[error("unsupported order {order} (maximum {max})")]
    UnsupportedOrder { order: usize, max: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfiguration(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("invalid arity: {0}")]
    InvalidArity(String),
    #[error("partitions are not nested: {0}")]
    Refinement(String),
    #[error("certificate invalid at level {level}, n = {n}, h = {h}: {reason}")]
    CertificateInvalid {
        level: usize,
        n: usize,
        h: usize,
        reason: String,
    },
    #[error("order mismatch: {left} vs {right}")]
    OrderMismatch { left: usize, right: usize },
    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),
    #[error("Gowers norm {measured} is below the requested {epsilon}")]
    NormTooSmall { measured: f64, epsilon: f64 },
    #[error("function is not measurable with respect to the algebra: {0}")]
    NotMeasurable(String),
    #[error("approximation budget exhausted: achieved L2 distance {achieved}, target {target}")]
    Budget { achieved: f64, target: f64 },
    #[error("energy-increment driver exceeded {steps} steps")]
    NonTermination { steps: u64, trace: Vec<String> },
    #[error("sub-solver failed on block {block}: {reason}")]
    SubSolver { block: usize, reason: String },
    #[error("invalid input: {0}")]
    Input(String),
    #[error("invalid mode: {0}")]
    Mode(String),
}

impl Error {
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NotPrime(_) => "not-prime",
            Error::Dimension { .. } => "dimension",
            Error::InvalidDilation(_) => "invalid-dilation",
            Error::EmptyDomain => "empty-domain",
            Error::InvalidCoefficient { .. } => "invalid-coefficient",
            Error::NumericalInconsistency(_) => "numerical-inconsistency",
            Error::UnsupportedOrder { .. } => "unsupported-order",
            Error::InvalidConfiguration(_) => "invalid-configuration",
            Error::Precondition(_) => "precondition",
            Error::InvalidArity(_) => "invalid-arity",
            Error::Refinement(_) => "refinement",
            Error::CertificateInvalid { .. } => "certificate-invalid",
            Error::OrderMismatch { .. } => "order-mismatch",
            Error::ResourceLimit(_) => "resource-limit",
            Error::NormTooSmall { .. } => "norm-too-small",
            Error::NotMeasurable(_) => "not-measurable",
            Error::Budget { .. } => "budget",
            Error::NonTermination { .. } => "non-termination",
            Error::SubSolver { .. } => "sub-solver",
            Error::Input(_) => "input",
            Error::Mode(_) => "mode",
        }
    }

    pub fn report(&self) -> ErrorReport {
        ErrorReport {
            kind: self.kind(),
            message: self.to_string(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorReport {
    pub kind: &'static str,
    pub message: String,
}

pub type Result<T> = std::result::Result<T, Error>;
