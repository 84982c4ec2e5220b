use thiserror::Error;

pub type Result<T, E = FrameError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FrameError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("non-finite entry in {what}")]
    NonFinite { what: &'static str },

    #[error("input spans the zero subspace")]
    ZeroSubspace,

    #[error("columns are not orthonormal (residual {residual:e})")]
    NotOrthonormal { residual: f64 },

    #[error("empty {what}")]
    Empty { what: &'static str },

    #[error("weight {index} must be finite and strictly positive, got {value}")]
    InvalidWeight { index: usize, value: f64 },

    #[error("operator is not Hermitian (relative residual {residual:e})")]
    NotHermitian { residual: f64 },

    #[error("operator is not positive semidefinite (eigenvalue {eigenvalue:e})")]
    NotPsd { eigenvalue: f64 },

    #[error("{which} is not invertible (smallest singular value {smallest:e})")]
    NotInvertible { which: &'static str, smallest: f64 },

    #[error("square-root gate failed at index {index}: {reason}")]
    SqrtGateFailed { index: usize, reason: Box<FrameError> },

    #[error("not a frame (lower bound {lower:e})")]
    NotAFrame { lower: f64 },

    #[error("frame operator is singular (condition number {condition:e})")]
    SingularOperator { condition: f64 },

    #[error("synthesis operator is not surjective (rank {rank} < dimension {dim})")]
    NotSurjective { rank: usize, dim: usize },

    #[error("controls differ (C != C', relative residual {residual:e})")]
    NotCSquared { residual: f64 },

    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),

    #[error("Q-dual defect {defect:e} exceeds tolerance {tolerance:e}")]
    InvalidQDual { defect: f64, tolerance: f64 },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("unknown tolerance '{0}'")]
    UnknownTolerance(String),
}
