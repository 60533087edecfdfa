use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("model invariant violated: {model} within tolerance {tol:e} (residual {residual:e})")]
    OffModel {
        model: String,
        residual: f64,
        tol: f64,
    },

    #[error("point outside domain: {0}")]
    OutsideDomain(String),

    #[error("empty grid: {0}")]
    EmptyGrid(String),

    #[error("degenerate eigenvalue {lambda} at node {node}: immersion requires values below 1/2")]
    DegenerateLambda { lambda: f64, node: usize },

    #[error("math domain error: {0}")]
    MathDomain(String),

    #[error("search failure: {0}")]
    SearchFailure(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
