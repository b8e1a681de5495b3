use thiserror::Error;

/// Errors produced by the analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("unphysical Bell-diagonal triple ({c1}, {c2}, {c3}): eigenvalue {label} = {value:.6e} < 0")]
    UnphysicalParams {
        c1: f64,
        c2: f64,
        c3: f64,
        label: &'static str,
        value: f64,
    },

    #[error("direction is not a unit vector (norm {0:.15})")]
    NonUnitDirection(f64),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("{name} = {value} is outside {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("arcsine argument {0} lies outside [-1, 1]")]
    PhaseDomainError(f64),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid box: {0}")]
    InvalidBox(String),

    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("unsupported number of settings n = {0} (expected 2 or 3)")]
    UnsupportedN(usize),

    #[error("axis {0} has zero correlation; the encoding is undefined")]
    DegenerateAxis(usize),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// True for errors caused by bad user input rather than internal failures.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::InvalidModel(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
