use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("grid: {0}")]
    Grid(String),
    #[error("params: {0}")]
    Params(String),
    #[error("potential: {0}")]
    Potential(String),
    #[error("operator: {0}")]
    Operator(String),
    #[error("extension: {0}")]
    Extension(String),
    #[error("geometry: {0}")]
    Geometry(String),
    #[error("solver: {0}")]
    Solver(String),
    #[error("diagnostics: {0}")]
    Diagnostics(String),
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
