use thiserror::Error;

/// Errors raised by the geometric and numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("point ({x1}, {x2}) lies outside the chart domain")]
    OutsideDomain { x1: f64, x2: f64 },
    #[error("metric is degenerate at ({x1}, {x2}): det = {det}")]
    DegenerateMetric { x1: f64, x2: f64, det: f64 },
    #[error("frame is degenerate at ({x1}, {x2}): kn - lm = {det}")]
    DegenerateFrame { x1: f64, x2: f64, det: f64 },
    #[error("invalid metric expression `{expr}`: {reason}")]
    Expression { expr: String, reason: String },
    #[error("unknown builtin metric `{0}`")]
    UnknownMetric(String),
    #[error("tolerance {0} outside [1e-14, 1e-3]")]
    Tolerance(f64),
    #[error("empty time window [{0}, {1}]")]
    EmptyWindow(f64, f64),
    #[error("step size underflow at t = {t} (h = {h})")]
    StepUnderflow { t: f64, h: f64 },
    #[error("non-finite value encountered at t = {0}")]
    NonFinite(f64),
    #[error("step budget of {0} exhausted")]
    TooManySteps(usize),
    #[error("time {t} outside trajectory window [{start}, {end}]")]
    OutsideWindow { t: f64, start: f64, end: f64 },
    #[error("elliptic parameter m = {0} outside [0, 1]")]
    EllipticParameter(f64),
    #[error("degenerate pendulum: p-momenta vanish")]
    DegeneratePendulum,
    #[error("state is not finite; integrator failure suspected")]
    InconsistentState,
    #[error("switching function A vanishes; projection is not an immersion")]
    NotImmersive,
    #[error("state is not a cusp of the surface projection")]
    NotACusp,
    #[error("unresolvable root cluster near t = {0}")]
    RootCluster(f64),
    #[error("classification pair ({0}, {1}) is outside the admissible list")]
    ForbiddenPair(String, String),
    #[error("flow is tangent to the leaf section (transversality {0:e})")]
    SectionTangent(f64),
    #[error("flow line did not reach the leaf section")]
    SectionMissed,
}

pub type Result<T> = std::result::Result<T, Error>;
