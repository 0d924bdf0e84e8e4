use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("bad block structure: {0}")]
    BadBlockStructure(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: String, actual: String },

    #[error("matrix entries must be finite")]
    NonFinite,

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("matrix is not positive semidefinite (min eigenvalue {0:e})")]
    NotPsd(f64),

    #[error("matrix is not unitary (max deviation {0:e})")]
    NotUnitary(f64),

    #[error("total trace must be 1, got {0}")]
    TraceNotOne(f64),

    #[error("algebra mismatch: {0}")]
    AlgebraMismatch(String),

    #[error("invalid algebra: {0}")]
    InvalidAlgebra(String),

    #[error("map is not completely positive")]
    NotCp,

    #[error("map is not unital (max deviation {0:e})")]
    NotUnital(f64),

    #[error("dimension law violated for target block {block}: {expected} != {actual}")]
    DimensionLaw { block: usize, expected: usize, actual: usize },

    #[error("state is not preserved by the homomorphism (residual {0:e})")]
    StateNotPreserved(f64),

    #[error("invalid tolerance: {0}")]
    InvalidTolerance(String),

    #[error("not a stochastic map: {0}")]
    NotStochastic(String),

    #[error("invalid probability vector: {0}")]
    InvalidProbability(String),

    #[error("target distribution is not the pushforward (residual {0:e})")]
    NotPushforward(f64),

    #[error("invalid function: {0}")]
    InvalidFunction(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
