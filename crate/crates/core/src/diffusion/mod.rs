//! The underlying motion: Feller explosion test, path sampling and Monte Carlo
//! explosion probabilities.

mod feller;
mod sde;

pub use feller::{feller_explosion_test, FellerReport};
pub(crate) use sde::replica_rng;
pub use sde::{
    explosion_probability_mc, simulate_path, CapEstimate, ExitFlag, ExplosionEstimate, PathSample,
};

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::model::{CoefficientSet, Coordinate};

type RadialFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// One-dimensional generator `P(r) u'' + Q(r) u'` on `(r_lo, r_hi)`.
#[derive(Clone)]
pub struct RadialGenerator {
    p: RadialFn,
    q: RadialFn,
    pub r_lo: f64,
    pub r_hi: f64,
    /// `Some((A, d))` when the generator is the radial part of `A(|x|) Δ` in `R^d`.
    isotropic: Option<(RadialFn, u32)>,
}

impl fmt::Debug for RadialGenerator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RadialGenerator")
            .field("r_lo", &self.r_lo)
            .field("r_hi", &self.r_hi)
            .field("isotropic_dim", &self.isotropic.as_ref().map(|(_, d)| *d))
            .finish()
    }
}

impl RadialGenerator {
    pub fn new(
        p: impl Fn(f64) -> f64 + Send + Sync + 'static,
        q: impl Fn(f64) -> f64 + Send + Sync + 'static,
        r_lo: f64,
        r_hi: f64,
    ) -> Self {
        RadialGenerator {
            p: Arc::new(p),
            q: Arc::new(q),
            r_lo,
            r_hi,
            isotropic: None,
        }
    }

    /// Radial part of `A(|x|) Δ` in dimension `d`: `P = A`, `Q = A (d-1)/r`.
    pub fn isotropic(a: impl Fn(f64) -> f64 + Send + Sync + 'static, d: u32) -> Self {
        let a: RadialFn = Arc::new(a);
        let (pa, qa) = (a.clone(), a.clone());
        let dm1 = d as f64 - 1.0;
        RadialGenerator {
            p: Arc::new(move |r| pa(r)),
            q: Arc::new(move |r| qa(r) * dm1 / r),
            r_lo: 0.0,
            r_hi: f64::INFINITY,
            isotropic: Some((a, d)),
        }
    }

    /// `(1 + r)^m Δ` in dimension `d`.
    pub fn radial_power(m: f64, d: u32) -> Self {
        Self::isotropic(move |r| (1.0 + r).powf(m), d)
    }

    pub fn from_coefficients(set: &CoefficientSet) -> Self {
        match set.coordinate() {
            Coordinate::Radial { .. } => {
                let s = set.clone();
                Self::isotropic(move |r| s.a(r), set.config().d)
            }
            Coordinate::Line { .. } => {
                let (sp, sq) = (set.clone(), set.clone());
                Self::new(
                    move |z| sp.diffusion(z),
                    move |z| sq.drift(z),
                    f64::NEG_INFINITY,
                    f64::INFINITY,
                )
            }
        }
    }

    pub fn p(&self, r: f64) -> f64 {
        (self.p)(r)
    }

    pub fn q(&self, r: f64) -> f64 {
        (self.q)(r)
    }

    pub(crate) fn isotropic_parts(&self) -> Option<(&RadialFn, u32)> {
        self.isotropic.as_ref().map(|(a, d)| (a, *d))
    }

    /// Checks `P > 0` at a few interior points.
    pub fn check_elliptic(&self) -> Result<()> {
        let lo = if self.r_lo.is_finite() {
            self.r_lo
        } else {
            -1e3
        };
        let hi = if self.r_hi.is_finite() {
            self.r_hi
        } else {
            lo.max(0.0) + 1e3
        };
        for i in 1..64 {
            let r = lo + (hi - lo) * i as f64 / 64.0;
            let p = self.p(r);
            if !(p > 0.0) {
                return Err(Error::Precondition(format!(
                    "diffusion coefficient must be positive, P({r}) = {p}"
                )));
            }
        }
        Ok(())
    }
}
