use thiserror::Error;

/// Errors raised by the meshing, solver, geometry and verification layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("no cell center lies inside the domain")]
    EmptyDomain,

    #[error("point ({0}, {1}) is not inside the domain")]
    OutsideDomain(f64, f64),

    #[error("operands live on different meshes")]
    MeshMismatch,

    #[error("invalid truncation range: a = {a} > b = {b}")]
    BadRange { a: f64, b: f64 },

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("flux coefficient is degenerate (p < 2, eps = 0, zero gradient)")]
    Degenerate,

    #[error("nonlinear solve did not converge after {iterations} iterations (last update {residual:e}){}",
        .eps.map(|e| format!(" at eps = {e:e}")).unwrap_or_default())]
    NoConvergence {
        iterations: usize,
        residual: f64,
        eps: Option<f64>,
    },

    #[error("linear solve stalled after {iterations} iterations (relative residual {residual:e})")]
    LinearSolve { iterations: usize, residual: f64 },

    #[error("argument {0} lies below the branch point -1/e")]
    OutOfBranch(f64),

    #[error("exponent p = {0} is outside (1, 2)")]
    BadExponent(f64),

    #[error("erosion is empty")]
    Empty,

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("test function does not vanish on boundary cells")]
    BadSupport,

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
