use thiserror::Error;

/// Failure modes shared by every numerical routine in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("series/inversion did not reach tolerance: {0}")]
    NonConvergence(String),

    #[error("Talbot contour could not be placed: {0}")]
    ContourFailure(String),

    #[error("invalid inversion config: {0}")]
    InvalidConfig(String),

    #[error("grid too short or non-uniform: {0}")]
    InsufficientGrid(String),

    #[error("derivative order {0} outside (0, 3]")]
    OrderOutOfRange(f64),

    #[error("integration horizon too short: {0}")]
    HorizonTooShort(String),

    #[error("kernel inversion failed at index {index}: {reason}")]
    InversionFailure { index: usize, reason: String },

    #[error("integral tail does not decay before s = {0}")]
    TailDivergence(f64),

    #[error("grids do not share a common axis: {0}")]
    GridMismatch(String),

    #[error("unsupported initial data: {0}")]
    UnsupportedIC(String),

    #[error("no pointwise kernel available: {0}")]
    KernelNotAvailable(String),

    #[error("importance weights oscillate too much (index {0:.3e})")]
    VarianceBlowup(f64),

    #[error("invalid space symbol: {0}")]
    InvalidSymbol(String),
}

pub type Result<T> = std::result::Result<T, Error>;
