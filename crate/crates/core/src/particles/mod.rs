//! Branching particle approximation `X_n(t) = (1/n) Σ δ_{Y_i(t)}` and Monte
//! Carlo estimators for extinction, bounded support, point hitting and
//! log-Laplace functionals.
//!
//! Replicas are seeded by `(seed, replica)` and merged in replica order, so
//! estimates do not depend on the thread count.

mod estimators;
mod offspring;
mod population;

pub use estimators::{
    estimate_csp_probability, estimate_extinction, estimate_hitting, loglaplace_check,
    mean_total_mass, radius_profile, support_radius_profile, write_run_log, CspEstimate,
    ExtinctionReport, HitTrend, HittingEstimate, LogLaplaceReport, LogLaplaceRow, RadiusQuantiles,
    ReplicaRecord, Setup, TestFunction, LOGLAPLACE_SLACK, TREND_SLOPE,
};
pub use offspring::{
    build_offspring_law, default_rate_constant, generating_function_gap, limit_functional,
    NoBranching, OffspringLaw, QuadraticLaw, StableLaw, MAX_TABLE, TRUNCATION,
};
pub use population::{
    step_population, Observer, Population, EXPLOSION_RADIUS, MAX_BRANCH_PROBABILITY,
};

/// Generator used by every particle simulation.
pub type ParticleRng = rand_chacha::ChaCha8Rng;
