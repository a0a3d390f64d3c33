use thiserror::Error;

/// Errors raised across the laboratory.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("alpha must be positive on the domain (found {value} at r = {radius})")]
    NonPositiveAlpha { radius: f64, value: f64 },

    #[error("beta is unbounded above on the domain: {0}")]
    UnboundedBeta(String),

    #[error("invalid domain: {0}")]
    BadDomain(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("config file: {0}")]
    ConfigFile(String),

    #[error("point-hitting analysis needs d >= 2 (got d = {0})")]
    DimensionTooSmall(u32),

    #[error(
        "beta shift is not bounded on the validation grid (max |shift| = {found}, bound = {bound})"
    )]
    UnboundedShift { found: f64, bound: f64 },

    #[error("quadrature failure: {0}")]
    QuadratureFailure(String),

    #[error(
        "step size too large: radius moved {increment} in one step (cap/10 = {limit}); reduce dt"
    )]
    StepSizeTooLarge { increment: f64, limit: f64 },

    #[error("semilinear solve did not converge at t = {time} (dt reached {dt})")]
    NonConvergence { time: f64, dt: f64 },

    #[error("scheme produced a negative value {value} at node {node}")]
    NegativeValue { node: usize, value: f64 },

    #[error("blow-up ladder exhausted without saturation (last relative change {last_change})")]
    NoSaturation { last_change: f64 },

    #[error("ladder too coarse: {0}")]
    LadderTooCoarse(String),

    #[error(
        "no barrier parameters satisfy the inequality within the search bounds (best max = {best})"
    )]
    NoValidParameters { best: f64 },

    #[error("comparison hypothesis not met: {0}")]
    HypothesisUnmet(String),

    #[error("invalid offspring law: {0}")]
    InvalidLaw(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("particle count {count} exceeded the hard cap {cap}")]
    PopulationExplosionCap { count: usize, cap: usize },

    #[error("missing artifacts: {0}")]
    MissingArtifacts(String),
}

pub type Result<T> = std::result::Result<T, Error>;
