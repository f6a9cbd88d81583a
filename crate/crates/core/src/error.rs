use thiserror::Error;

/// Errors produced by the numerical kernels and the verification lab.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not Hermitian: max asymmetry {asymmetry:e} exceeds {tolerance:e}")]
    NotHermitian { asymmetry: f64, tolerance: f64 },

    #[error("matrix is not positive semidefinite: smallest eigenvalue {min_eigenvalue:e} below -{tolerance:e}")]
    NotPositive { min_eigenvalue: f64, tolerance: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("eigensolver failed to converge (residual {residual:e})")]
    EigenNonConvergence { residual: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("singular or ill-conditioned system (condition estimate {condition:e})")]
    Singular { condition: f64 },

    #[error("quadrature self-test failed: {0}")]
    Quadrature(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
