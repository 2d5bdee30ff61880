use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum QksError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("not a member of {space}: relative residual {residual:.3e}")]
    NotMember { space: &'static str, residual: f64 },
    #[error("point outside the ball interior (1 - c̃ϱ = {0:.3e})")]
    OutsideBall(f64),
    #[error("finite-difference stencil leaves the ball (margin {margin:.3e}, step {h:.3e})")]
    Margin { margin: f64, h: f64 },
    #[error("division by a zero quaternion")]
    ZeroDivision,
    #[error("holonomy span not closed under brackets: residual {0:.3e}")]
    HolonomyNotClosed(f64),
    #[error("dimension check failed for class {class}: rank {computed}, formula {formula}")]
    DimensionCheck { class: usize, computed: usize, formula: usize },
    #[error("tensor parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, QksError>;
