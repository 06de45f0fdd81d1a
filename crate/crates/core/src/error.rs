use thiserror::Error;

/// Errors raised by the laboratory.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("ball centered at ({x:.6}, {y:.6}) with radius {radius:.6} escapes the grid")]
    BallOutsideGrid { x: f64, y: f64, radius: f64 },

    #[error("degenerate field: {0}")]
    DegenerateField(String),

    #[error("conjugate gradient did not converge after {iterations} iterations (relative residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("mass matrix is not positive definite")]
    IndefiniteMass,

    #[error("point {0:.6} is not a free boundary point of the requested phase")]
    NotFreeBoundary(f64),

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
