//! Numerical laboratory for the compact support property of superdiffusions.
//!
//! A superdiffusion is described by an underlying motion `L`, a branching
//! mechanism `beta(x) z - alpha(x) z^p` and a domain. The crate decides
//! whether the support of the process stays bounded in three independent
//! ways:
//!
//! * [`theory`] matches the configuration against the known classification
//!   rules;
//! * [`pde`] builds maximal solutions of `u_t = Lu + beta u - alpha u^p` from
//!   blow-up boundary problems and checks explicit barriers;
//! * [`particles`] runs the branching particle approximation.
//!
//! [`diffusion`] analyzes the motion itself (explosion, path sampling).

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diffusion;
pub mod error;
pub mod model;
pub mod particles;
pub mod pde;
pub mod stats;
pub mod theory;

pub use error::{Error, Result};
pub use model::{
    build_coefficients, validate_config, CoefficientSet, CoefficientSpec, DomainKind, ModelConfig,
    MotionSpec,
};
pub use theory::{Outcome, Verdict};
