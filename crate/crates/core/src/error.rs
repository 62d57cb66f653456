use thiserror::Error;

/// Errors raised by the billiard laboratory.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid oval: {0}")]
    InvalidOval(String),

    #[error("point ({x}, {y}) is not strictly outside the oval")]
    Containment { x: f64, y: f64 },

    #[error("angle gap {omega} outside the admissible range ({lo}, {hi})")]
    GapDomain { omega: f64, lo: f64, hi: f64 },

    #[error("reversed or overlong interval [{from}, {to}]")]
    ReversedInterval { from: f64, to: f64 },

    #[error("tangency root not found: {0}")]
    TangencyRoot(String),

    #[error("billiard step failed at ({alpha1}, {alpha2}): {reason}")]
    StepFailure {
        alpha1: f64,
        alpha2: f64,
        reason: String,
    },

    #[error("orbit failed at iterate {index}: {source}")]
    OrbitStep {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("angle gaps collapsed during iteration")]
    CollapsedGaps,

    #[error("invalid period data: {0}")]
    InvalidPeriod(String),

    #[error("f-prime bound violated: |f'({x})| = {value} >= 2")]
    FPrimeBound { x: f64, value: f64 },

    #[error("profile is not anti-periodic under x -> x + pi/2 (defect {defect:e})")]
    Antiperiodicity { defect: f64 },

    #[error("profile is not normalized: f(0) = {value:e}")]
    NotNormalized { value: f64 },

    #[error("angle parameterization not monotone: alpha'({x}) = {value}")]
    NonMonotone { x: f64, value: f64 },

    #[error("convexity failure: curvature radius {radius} at alpha = {alpha}")]
    Convexity { alpha: f64, radius: f64 },

    #[error("arc constraint violated: {0}")]
    ArcConstraint(String),

    #[error("seam discontinuity {defect:e} at alpha = {alpha}")]
    SeamDiscontinuity { alpha: f64, defect: f64 },

    #[error("degenerate polygon: {0}")]
    DegeneratePolygon(String),

    #[error("invalid angle triple: {0}")]
    TriangleDomain(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
