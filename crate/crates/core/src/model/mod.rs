//! Problem configuration shared by every analyzer.
//!
//! A [`ModelConfig`] fixes the underlying motion `L`, the branching
//! mechanism `beta(r) z - alpha(r) z^p`, the spatial domain and the time
//! horizon. All coefficients are radial.

mod coefficients;
pub mod file;

pub use coefficients::{
    build_coefficients, line_coefficients, line_of_radius, radius_of_line, Bounds, CoefficientSet,
    Coordinate,
};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Number of radii in the validation grid.
pub const VALIDATION_POINTS: usize = 1024;
/// Smallest radius of the validation grid.
pub const VALIDATION_MIN: f64 = 1e-6;
/// Largest radius of the validation grid.
pub const VALIDATION_MAX: f64 = 1e6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    /// Spatial dimension.
    pub d: u32,
    /// Power of the nonlinearity.
    pub p: f64,
    pub motion: MotionSpec,
    pub alpha: CoefficientSpec,
    pub beta: CoefficientSpec,
    #[serde(default)]
    pub domain: DomainKind,
    #[serde(default = "default_horizon")]
    pub horizon: f64,
}

fn default_horizon() -> f64 {
    1.0
}

fn one() -> f64 {
    1.0
}

/// The underlying motion.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MotionSpec {
    /// `L = A(r) Δ` with `A(r) = lead * (1 + r)^m`; `lead` must lie in `[1/c0, c0]`.
    RadialPower {
        m: f64,
        #[serde(default = "one")]
        c0: f64,
        #[serde(default = "one")]
        lead: f64,
    },
    /// `L = A(r) Δ` with `A` linearly interpolated from samples, constant beyond the ends.
    Table { radii: Vec<f64>, values: Vec<f64> },
    /// One-dimensional generator `½ a(z) u'' + b(z) u'` obtained from the
    /// radial part of `½Δ` in dimension `dim` through the chart `z = 1/r - r`.
    /// Coefficient specs of such a config are functions of `r(z)`.
    PuncturedLine { dim: f64 },
}

impl MotionSpec {
    pub fn radial_power(m: f64) -> Self {
        MotionSpec::RadialPower {
            m,
            c0: 1.0,
            lead: 1.0,
        }
    }

    /// `½ (1 + r)^m Δ`; with `m = 0` this is the generator of Brownian motion.
    pub fn half_radial_power(m: f64) -> Self {
        MotionSpec::RadialPower {
            m,
            c0: 2.0,
            lead: 0.5,
        }
    }

    /// Growth exponent of `A(r)` at infinity, when known.
    pub fn growth_exponent(&self) -> Option<f64> {
        match self {
            MotionSpec::RadialPower { m, .. } => Some(*m),
            MotionSpec::Table { .. } => Some(0.0),
            MotionSpec::PuncturedLine { .. } => None,
        }
    }
}

/// Radial coefficient families.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CoefficientSpec {
    /// `c`
    Constant { c: f64 },
    /// `c (1 + r)^q`
    PowerLaw { c: f64, q: f64 },
    /// `c1 exp(-c2 r^s)`
    StretchedExp { c1: f64, c2: f64, s: f64 },
    /// `k / r^2`
    InverseSquare { k: f64 },
    /// `-c (1 + r)^q`
    NegPower { c: f64, q: f64 },
}

impl CoefficientSpec {
    pub fn constant(c: f64) -> Self {
        CoefficientSpec::Constant { c }
    }

    pub fn power_law(c: f64, q: f64) -> Self {
        CoefficientSpec::PowerLaw { c, q }
    }

    pub fn stretched_exp(c1: f64, c2: f64, s: f64) -> Self {
        CoefficientSpec::StretchedExp { c1, c2, s }
    }

    pub fn inverse_square(k: f64) -> Self {
        CoefficientSpec::InverseSquare { k }
    }

    pub fn neg_power(c: f64, q: f64) -> Self {
        CoefficientSpec::NegPower { c, q }
    }

    pub fn eval(&self, r: f64) -> f64 {
        match *self {
            CoefficientSpec::Constant { c } => c,
            CoefficientSpec::PowerLaw { c, q } => c * (1.0 + r).powf(q),
            CoefficientSpec::StretchedExp { c1, c2, s } => c1 * (-c2 * r.powf(s)).exp(),
            CoefficientSpec::InverseSquare { k } => k / (r * r),
            CoefficientSpec::NegPower { c, q } => -c * (1.0 + r).powf(q),
        }
    }

    /// Limit of the coefficient as `r -> 0+` (`r = 0`) or `r -> inf` (`r = inf`),
    /// or its value at an interior radius. Every family is monotone in `r`.
    pub fn limit(&self, r: f64) -> f64 {
        if r > 0.0 && r.is_finite() {
            return self.eval(r);
        }
        let at_infinity = r.is_infinite();
        match *self {
            CoefficientSpec::Constant { c } => c,
            CoefficientSpec::PowerLaw { c, q } | CoefficientSpec::NegPower { c, q } => {
                let c = if matches!(self, CoefficientSpec::NegPower { .. }) {
                    -c
                } else {
                    c
                };
                if !at_infinity || q == 0.0 || c == 0.0 {
                    c
                } else if q < 0.0 {
                    0.0
                } else {
                    c.signum() * f64::INFINITY
                }
            }
            CoefficientSpec::StretchedExp { c1, c2, s } => {
                if c1 == 0.0 || c2 == 0.0 || s == 0.0 {
                    return self.eval(1.0);
                }
                // r^s -> inf at infinity when s > 0, at the origin when s < 0.
                let power_blows_up = at_infinity == (s > 0.0);
                if !power_blows_up {
                    c1
                } else if c2 > 0.0 {
                    0.0
                } else {
                    c1.signum() * f64::INFINITY
                }
            }
            CoefficientSpec::InverseSquare { k } => {
                if at_infinity || k == 0.0 {
                    0.0
                } else {
                    k.signum() * f64::INFINITY
                }
            }
        }
    }

    /// Exact infimum and supremum over the radius interval `(lo, hi)`;
    /// `hi` may be infinite. Infinite entries mean unbounded.
    pub fn range_on(&self, lo: f64, hi: f64) -> (f64, f64) {
        let a = self.limit(lo);
        let b = self.limit(hi);
        (a.min(b), a.max(b))
    }

    /// Polynomial growth exponent at infinity: `f(r) ~ r^q`.
    /// `-inf` for faster-than-polynomial decay, `+inf` for faster-than-polynomial growth.
    pub fn growth_exponent(&self) -> f64 {
        match *self {
            CoefficientSpec::Constant { c } => {
                if c == 0.0 {
                    f64::NEG_INFINITY
                } else {
                    0.0
                }
            }
            CoefficientSpec::PowerLaw { c, q } | CoefficientSpec::NegPower { c, q } => {
                if c == 0.0 {
                    f64::NEG_INFINITY
                } else {
                    q
                }
            }
            CoefficientSpec::StretchedExp { c1, c2, s } => {
                if c1 == 0.0 {
                    f64::NEG_INFINITY
                } else if c2 == 0.0 || s <= 0.0 {
                    0.0
                } else if c2 > 0.0 {
                    f64::NEG_INFINITY
                } else {
                    f64::INFINITY
                }
            }
            CoefficientSpec::InverseSquare { k } => {
                if k == 0.0 {
                    f64::NEG_INFINITY
                } else {
                    -2.0
                }
            }
        }
    }

    /// Whether the family is positive at every radius (decided from its parameters,
    /// since fast-decaying members underflow on the validation grid).
    pub fn positive_everywhere(&self) -> bool {
        match *self {
            CoefficientSpec::Constant { c } | CoefficientSpec::PowerLaw { c, .. } => c > 0.0,
            CoefficientSpec::StretchedExp { c1, .. } => c1 > 0.0,
            CoefficientSpec::InverseSquare { k } => k > 0.0,
            CoefficientSpec::NegPower { c, .. } => c < 0.0,
        }
    }

    /// `lim_{r -> 0} r^2 f(r)`.
    pub fn inverse_square_strength(&self) -> f64 {
        match *self {
            CoefficientSpec::InverseSquare { k } => k,
            _ => 0.0,
        }
    }
}

/// Spatial domain of the problem.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DomainKind {
    #[default]
    FullSpace,
    /// Space with the origin removed.
    Punctured,
    Ball {
        radius: f64,
    },
    Annulus {
        inner: f64,
        outer: f64,
    },
}

impl DomainKind {
    /// Radius interval `(lo, hi)` covered by the domain.
    pub fn radius_interval(&self) -> (f64, f64) {
        match *self {
            DomainKind::FullSpace | DomainKind::Punctured => (0.0, f64::INFINITY),
            DomainKind::Ball { radius } => (0.0, radius),
            DomainKind::Annulus { inner, outer } => (inner, outer),
        }
    }
}

/// Log-spaced radii in `[1e-6, 1e6]`, clipped to the open radius interval `(lo, hi)`.
pub fn validation_grid(lo: f64, hi: f64) -> Vec<f64> {
    let a = if lo > 0.0 {
        (lo * (1.0 + 1e-9)).max(VALIDATION_MIN)
    } else {
        VALIDATION_MIN
    };
    let b = if hi.is_finite() {
        (hi * (1.0 - 1e-9)).min(VALIDATION_MAX)
    } else {
        VALIDATION_MAX
    };
    if !(a < b) {
        return vec![a.min(b)];
    }
    let (la, lb) = (a.ln(), b.ln());
    let n = VALIDATION_POINTS;
    (0..n)
        .map(|i| (la + (lb - la) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// One violated standing assumption.
#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub field: &'static str,
    pub message: String,
}

/// Outcome of [`validate_config`].
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    /// Non-fatal notes, e.g. that the particle module is unavailable.
    pub flags: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    /// Whether the branching particle approximation exists for this `p`.
    pub fn particles_available(&self) -> bool {
        self.is_valid() && !self.flags.iter().any(|f| f.starts_with(PDE_ONLY_FLAG))
    }

    fn violation(&mut self, field: &'static str, message: impl Into<String>) {
        self.violations.push(Violation {
            field,
            message: message.into(),
        });
    }
}

pub const PDE_ONLY_FLAG: &str = "particle module unavailable, PDE classifiers allowed";

/// Checks every standing assumption and reports all violations at once.
pub fn validate_config(config: &ModelConfig) -> ValidationReport {
    let mut report = ValidationReport::default();

    if config.d == 0 {
        report.violation("d", "dimension must be at least 1");
    }
    if !(config.p > 1.0) || !config.p.is_finite() {
        report.violation("p", format!("p must exceed 1 (got {})", config.p));
    } else if config.p > 2.0 {
        report
            .flags
            .push(format!("{PDE_ONLY_FLAG} (p = {} > 2)", config.p));
    }
    if !(config.horizon > 0.0) || !config.horizon.is_finite() {
        report.violation("horizon", "horizon must be positive and finite");
    }

    let (lo, hi) = config.domain.radius_interval();
    match config.domain {
        DomainKind::Ball { radius } if !(radius > 0.0 && radius.is_finite()) => {
            report.violation("domain", "ball radius must be positive and finite");
        }
        DomainKind::Annulus { inner, outer }
            if !(inner > 0.0 && outer > inner && outer.is_finite()) =>
        {
            report.violation("domain", "annulus needs 0 < inner < outer < inf");
        }
        _ => {}
    }

    match &config.motion {
        MotionSpec::RadialPower { m, c0, lead } => {
            if !m.is_finite() {
                report.violation("motion", "radial power exponent m must be finite");
            }
            if !(*c0 >= 1.0) {
                report.violation("motion", "ellipticity constant c0 must be at least 1");
            } else if !(*lead >= 1.0 / c0 - 1e-15 && *lead <= c0 + 1e-15) {
                report.violation(
                    "motion",
                    format!("lead coefficient {lead} violates 1/c0 <= lead <= c0 with c0 = {c0}"),
                );
            }
        }
        MotionSpec::Table { radii, values } => {
            if radii.len() < 2 || radii.len() != values.len() {
                report.violation("motion", "table needs at least two (radius, value) samples");
            } else if radii.windows(2).any(|w| !(w[1] > w[0])) {
                report.violation("motion", "table radii must be strictly increasing");
            }
            if values.iter().any(|v| !(*v > 0.0)) {
                report.violation("motion", "table values must be positive (ellipticity)");
            }
        }
        MotionSpec::PuncturedLine { dim } => {
            if !(*dim >= 2.0) {
                report.violation("motion", "punctured line chart needs dim >= 2");
            }
            if config.domain != DomainKind::FullSpace {
                report.violation("domain", "line generator configs live on the full line");
            }
        }
    }

    let grid = validation_grid(lo, hi);
    if !config.alpha.positive_everywhere() {
        let (r, v) = grid
            .iter()
            .map(|&r| (r, config.alpha.eval(r)))
            .find(|(_, v)| !(*v > 0.0))
            .unwrap_or((grid[0], config.alpha.eval(grid[0])));
        report.violation(
            "alpha",
            format!("alpha must be positive, found {v} at r = {r}"),
        );
    }
    let (_, beta_sup) = config.beta.range_on(lo, hi);
    let grid_sup = grid
        .iter()
        .map(|&r| config.beta.eval(r))
        .fold(f64::NEG_INFINITY, f64::max);
    if !beta_sup.is_finite() || !grid_sup.is_finite() {
        report.violation("beta", "beta unbounded above");
    }

    report
}

impl ModelConfig {
    /// Short stable digest of the canonical serialization.
    pub fn config_hash(&self) -> String {
        let text = toml::to_string(self).unwrap_or_else(|_| format!("{self:?}"));
        let digest = Sha256::digest(text.as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn with_alpha(&self, alpha: CoefficientSpec) -> Self {
        ModelConfig {
            alpha,
            ..self.clone()
        }
    }

    pub fn with_beta(&self, beta: CoefficientSpec) -> Self {
        ModelConfig {
            beta,
            ..self.clone()
        }
    }

    pub fn with_domain(&self, domain: DomainKind) -> Self {
        ModelConfig {
            domain,
            ..self.clone()
        }
    }

    /// Convenience constructor for `A(r) = (1 + r)^m` on the full space.
    pub fn radial(d: u32, p: f64, m: f64, alpha: CoefficientSpec, beta: CoefficientSpec) -> Self {
        ModelConfig {
            d,
            p,
            motion: MotionSpec::radial_power(m),
            alpha,
            beta,
            domain: DomainKind::FullSpace,
            horizon: 1.0,
        }
    }

    /// `½Δ` on the punctured space with `alpha = 1`.
    pub fn punctured_brownian(d: u32, p: f64, beta: CoefficientSpec) -> Self {
        ModelConfig {
            d,
            p,
            motion: MotionSpec::half_radial_power(0.0),
            alpha: CoefficientSpec::constant(1.0),
            beta,
            domain: DomainKind::Punctured,
            horizon: 1.0,
        }
    }
}
