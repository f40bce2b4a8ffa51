use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("matrix is not Hermitian (relative deviation {0:.3e})")]
    NotHermitian(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("function is undefined at eigenvalue {0:.6e}")]
    UndefinedFunction(f64),
    #[error("operator has a negative eigenvalue {0:.3e}")]
    NegativeEigenvalue(f64),
    #[error("operator is rank deficient (smallest eigenvalue {0:.3e})")]
    RankDeficient(f64),
    #[error("objective returned a non-finite value at {0}")]
    NonFinite(f64),
    #[error("semidefinite solver failed: {0}")]
    Solver(String),
    #[error("unsupported request: {0}")]
    Unsupported(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
