use thiserror::Error;

#[derive(Debug, Error)]
pub enum OpticsError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("aperture radius {radius:e} m exceeds the grid half extent {half_extent:e} m")]
    ClippedAperture { radius: f64, half_extent: f64 },
    #[error("phase evaluation produced a non-finite value at ({x:e}, {y:e})")]
    NonFinite { x: f64, y: f64 },
    #[error("quadrature of {cost} samples exceeds budget {budget}; pass an override to force it")]
    BudgetExceeded { cost: u64, budget: u64 },
    #[error("empty mask: no pixels selected")]
    EmptyMask,
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("unsupported configuration: {0}")]
    Unsupported(String),
    #[error("sorting condition violated: {0}")]
    SortingCondition(String),
    #[error("undersampled phase: {what} changes by {step:.3} rad per pixel (limit pi)")]
    Undersampled { what: String, step: f64 },
    #[error("no spot: peak-to-background ratio {ratio:.3} below {threshold}")]
    NoSpot { ratio: f64, threshold: f64 },
    #[error("malformed CFOF data: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = OpticsError> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> OpticsError {
    OpticsError::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
