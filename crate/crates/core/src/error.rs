use thiserror::Error;

/// Errors raised by the forward model, the linear algebra kernels and the
/// solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FdemError {
    #[error("invalid layered model: {0}")]
    InvalidModel(String),
    #[error("invalid device configuration: {0}")]
    InvalidDevice(String),
    #[error("invalid solver parameters: {0}")]
    InvalidParams(String),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("degenerate denominator N0 + Y1 = 0 in reflection factor")]
    DivisionDegenerate,
    #[error("Hankel quadrature did not converge within {panels} panels")]
    NoConvergence { panels: usize },
    #[error("operator size {0} is too small")]
    SizeTooSmall(usize),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("derivative order {order} is not valid for {n} unknowns")]
    BadOrder { order: usize, n: usize },
    #[error("matrix pair has a common null space")]
    CommonNullspace,
    #[error("truncation index {ell} outside 1..={max}")]
    TruncationOutOfRange { ell: usize, max: usize },
    #[error("line search found no admissible step above {alpha_min}")]
    LineSearchFailed { alpha_min: f64 },
    #[error("reference image has zero norm")]
    ZeroReference,
    #[error("dense oracle limited to {cap} unknowns, got {size}")]
    SizeCap { cap: usize, size: usize },
    #[error("every column failed: {0}")]
    AllColumnsFailed(String),
}

pub type Result<T, E = FdemError> = std::result::Result<T, E>;
