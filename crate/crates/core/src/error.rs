use thiserror::Error;

/// Errors produced by the model, simulation and analysis layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("degenerate transform: gamma = 1 has no power-map reduction")]
    DegenerateTransform,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("regime violation: {0}")]
    Regime(String),

    #[error("singular sample: explicit-solution base is zero")]
    SingularSample,

    #[error("input error: {0}")]
    Input(String),

    #[error("all importance weights are zero")]
    DegenerateWeights,
}

pub type Result<T> = std::result::Result<T, Error>;
