use thiserror::Error;

/// Errors raised by every fallible operation in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("incompatible grids: {0}")]
    IncompatibleGrids(String),

    #[error("{what} = {value} is not a multiple of the grid spacing {spacing}")]
    OffGrid { what: &'static str, value: f64, spacing: f64 },

    #[error("zero input: {0}")]
    ZeroInput(String),

    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("infeasible grid: {0}")]
    InfeasibleGrid(String),

    #[error("unknown experiment id `{0}`")]
    UnknownExperiment(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
