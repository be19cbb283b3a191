use thiserror::Error;

/// Errors produced by the brushlet library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid anisotropy: {0}")]
    InvalidAnisotropy(String),

    #[error("invalid covering parameter: {0}")]
    InvalidCovering(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("layer {requested} exceeds the built range (j_max = {j_max})")]
    OutsideRange { requested: u32, j_max: u32 },

    #[error("sample grid does not cover {0}")]
    InsufficientCoverage(String),

    #[error("quadrature did not converge: {0}")]
    QuadratureNonConvergence(String),

    #[error("quadrature budget exceeded: {0}")]
    QuadratureBudget(String),

    #[error("infeasible experiment parameters: {0}")]
    InfeasibleParameters(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
