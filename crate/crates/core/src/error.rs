use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("reaction curvature matrix is not symmetric (max asymmetry {0:e})")]
    NonSymmetric(f64),
    #[error("reaction curvature matrix is not positive semidefinite (eigenvalue {0:e})")]
    NotPsd(f64),
    #[error("mode {mode} has zero curvature but nonzero linear coefficient {b:e}; no Gaussian kernel exists")]
    SingularAffineMode { mode: usize, b: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("elapsed time must be positive (got {0:e}); the kernel is a Dirac delta at t = t0")]
    NonpositiveTime(f64),
    #[error("invalid time window: t0 = {t0}, t = {t}")]
    InvalidWindow { t0: f64, t: f64 },
    #[error("Poisson bracket of order {0} is not supported (only j <= 2)")]
    UnsupportedOrder(u32),
    #[error("cost guard: {0}")]
    CostGuard(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid field: {0}")]
    InvalidField(String),
    #[error("nothing to resolve: rate has no affine part")]
    NoAffinePart,
    #[error("affine sign is ambiguous (residual +1: {plus:e}, -1: {minus:e})")]
    AmbiguousSign { plus: f64, minus: f64 },
    #[error("kernel row sum {value:e} at node {index} underflowed; coupling is degenerate")]
    DegenerateCoupling { index: usize, value: f64 },
    #[error("Sinkhorn did not converge in {iterations} iterations (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
}

pub type Result<T> = std::result::Result<T, Error>;
