use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("matrix is singular")]
    Singular,
    #[error("matrix is not idempotent (residual {0:.3e})")]
    NotIdempotent(f64),
    #[error("subspace is not closed under multiplication (residual {0:.3e})")]
    NotAlgebra(f64),
    #[error("not a module over the full block algebra (residual {0:.3e})")]
    NotAModule(f64),
    #[error("classifier inconsistency: {0}")]
    Inconsistent(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Shape(_) | Error::InvalidInput(_) | Error::NotIdempotent(_) => 2,
            Error::NotAlgebra(_) => 2,
            _ => 3,
        }
    }
}
