use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("boundary partition rejected: {0}")]
    Partition(String),

    #[error("parameter out of range: {0}")]
    Parameter(String),

    #[error("{dofs} free dofs exceed the dense decomposition cap of {cap}; request fewer eigenpairs, use the extension route or raise the cap")]
    DofCapExceeded { dofs: usize, cap: usize },

    #[error("truncated basis ({retained} of {total} modes) used without opting in")]
    TruncatedBasis { retained: usize, total: usize },

    #[error("linear solver did not converge: relative residual {residual:e} after {iterations} iterations")]
    SolverDivergence { residual: f64, iterations: usize },

    #[error("eigensolver failure: {0}")]
    Eigen(String),

    #[error("kappa_s calibration is mu-dependent: relative spread {spread:e}")]
    Calibration { spread: f64 },

    #[error("nonexistence regime: lambda = {lambda} >= lambda_1s = {lambda_1s}")]
    NonexistenceRegime { lambda: f64, lambda_1s: f64 },

    #[error("mesh mismatch: {0}")]
    Mismatch(String),

    #[error("io error: {0}")]
    Io(String),

    #[error("serialization error: {0}")]
    Serde(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serde(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
