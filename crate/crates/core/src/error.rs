use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid fault geometry: {0}")]
    InvalidGeometry(String),

    #[error("refinement index n = {n} is too small: {reason}")]
    MeshTooCoarse { n: usize, reason: String },

    #[error("operation requires a {expected} mesh")]
    WrongMeshKind { expected: &'static str },

    #[error("unsupported quadrature order {0} (supported: 1..={max})", max = crate::fem::quadrature::MAX_ORDER)]
    UnsupportedQuadrature(usize),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite value from {what} at ({x}, {y})")]
    NonFinite { what: &'static str, x: f64, y: f64 },

    #[error("matrix is not positive definite (breakdown at step {step}, curvature {curvature:e})")]
    NotPositiveDefinite { step: usize, curvature: f64 },

    #[error("linear solve missed the tolerance after {iterations} iterations (relative residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("test function does not vanish on y = +-1 (|u| = {value:e} at x = {x})")]
    BoundaryViolation { x: f64, value: f64 },

    #[error("grid too coarse: {points} points in a direction, at least {required} required")]
    GridTooCoarse { points: usize, required: usize },

    #[error("defect line direction vanishes at sample (t, x, y) = ({t}, {x}, {y})")]
    DegenerateDirection { t: f64, x: f64, y: f64 },

    #[error("point ({x}, {y}) lies outside the domain or on a singularity")]
    OutOfDomain { x: f64, y: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
