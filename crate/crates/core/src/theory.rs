//! Classification rules for compact support, explosion and point hitting.
//!
//! Each rule is a predicate on a [`ModelConfig`]: hypotheses are matched
//! syntactically on coefficient families, with numeric checks on the
//! validation grid where a family alone does not decide. Rules carry
//! descriptive identifiers (see [`rules`]).

use serde::Serialize;
use std::fmt;

use crate::error::{Error, Result};
use crate::model::{
    validate_config, validation_grid, CoefficientSpec, DomainKind, ModelConfig, MotionSpec,
};

/// Rule identifiers used as verdict sources.
pub mod rules {
    pub const LINEAR_GROWTH_CONSERVATIVE: &str = "linear-growth-conservative";
    pub const RADIAL_POWER_EXPLOSION: &str = "radial-power-explosion";
    pub const ALPHA_BOUNDED_BELOW: &str = "alpha-bounded-below";
    pub const ALPHA_SLOW_DECAY: &str = "alpha-slow-decay";
    pub const ALPHA_FAST_DECAY: &str = "alpha-fast-decay";
    pub const FAST_MOTION_BOUNDED_ALPHA: &str = "fast-motion-bounded-alpha";
    pub const LINE_SUPERLINEAR_MOTION: &str = "line-superlinear-motion";
    pub const LINE_SUBLINEAR_MOTION: &str = "line-sublinear-motion";
    pub const STATIONARY_OBSTRUCTION: &str = "stationary-obstruction";
    pub const EXPLOSIVE_POSITIVE_BETA_RATIO: &str = "explosive-positive-beta-ratio";
    pub const EXPLOSIVE_BOUNDED_ALPHA: &str = "explosive-bounded-alpha";
    pub const PUNCTURED_CRITICAL_DIMENSION: &str = "punctured-critical-dimension";
    pub const INVERSE_SQUARE_SUPERCRITICAL: &str = "inverse-square-supercritical";
    pub const INVERSE_SQUARE_SUBCRITICAL: &str = "inverse-square-subcritical";
    pub const COMPARISON: &str = "comparison";
    pub const BOUNDED_BETA_SHIFT: &str = "bounded-beta-shift";
    pub const NONE: &str = "none";
}

/// Whether the compact support property holds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Csp {
    Holds,
    Fails,
}

/// Whether the underlying diffusion explodes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Explosion {
    Conservative,
    Explodes,
}

/// Whether the process hits a point with positive probability.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Hitting {
    Hits,
    Never,
}

pub trait Outcome: Copy + PartialEq + fmt::Debug {
    fn label(&self) -> &'static str;
}

impl Outcome for Csp {
    fn label(&self) -> &'static str {
        match self {
            Csp::Holds => "Holds",
            Csp::Fails => "Fails",
        }
    }
}

impl Outcome for Explosion {
    fn label(&self) -> &'static str {
        match self {
            Explosion::Conservative => "Conservative",
            Explosion::Explodes => "Explodes",
        }
    }
}

impl Outcome for Hitting {
    fn label(&self) -> &'static str {
        match self {
            Hitting::Hits => "Hits",
            Hitting::Never => "Never",
        }
    }
}

impl Hitting {
    /// Compact support of the punctured process fails exactly when the point is hit.
    pub fn from_punctured(csp: Csp) -> Self {
        match csp {
            Csp::Holds => Hitting::Never,
            Csp::Fails => Hitting::Hits,
        }
    }
}

/// Three-valued classification; `value = None` means undetermined.
#[derive(Clone, Debug, PartialEq)]
pub struct Verdict<T> {
    pub value: Option<T>,
    pub source: String,
    pub note: String,
    /// Hypotheses that were checked and not met (non-empty when undetermined).
    pub unmet: Vec<String>,
}

impl<T: Outcome> Verdict<T> {
    pub fn decided(value: T, source: &str, note: impl Into<String>) -> Self {
        Verdict {
            value: Some(value),
            source: source.to_string(),
            note: note.into(),
            unmet: Vec::new(),
        }
    }

    pub fn undetermined(source: &str, unmet: Vec<String>) -> Self {
        let note = unmet.join("; ");
        Verdict {
            value: None,
            source: source.to_string(),
            note,
            unmet,
        }
    }

    pub fn is_decided(&self) -> bool {
        self.value.is_some()
    }

    pub fn label(&self) -> &'static str {
        self.value.map_or("Undetermined", |v| v.label())
    }

    /// CSV row `(config-hash, value, source, note)`.
    pub fn csv_row(&self, config_hash: &str) -> [String; 4] {
        [
            config_hash.to_string(),
            self.label().to_string(),
            self.source.clone(),
            self.note.clone(),
        ]
    }

    /// Same conclusion under another source.
    pub fn relabel(&self, source: &str, note: impl Into<String>) -> Self {
        Verdict {
            value: self.value,
            source: source.to_string(),
            note: note.into(),
            unmet: self.unmet.clone(),
        }
    }
}

/// `(d(p-1) - 2p) / (p-1)^2`; negative exactly when `d < 2p/(p-1)`.
pub fn beta0(d: f64, p: f64) -> f64 {
    (d * (p - 1.0) - 2.0 * p) / ((p - 1.0) * (p - 1.0))
}

/// Critical dimension `2p/(p-1)` for hitting points.
pub fn critical_dimension(p: f64) -> f64 {
    2.0 * p / (p - 1.0)
}

/// Supremum and infimum facts about a configuration.
struct Facts {
    alpha_inf: f64,
    alpha_sup: f64,
    alpha_at_origin: f64,
    beta_inf: f64,
    beta_sup: f64,
}

impl Facts {
    fn new(config: &ModelConfig) -> Self {
        let (lo, hi) = config.domain.radius_interval();
        let (alpha_inf, alpha_sup) = config.alpha.range_on(lo, hi);
        let (beta_inf, beta_sup) = config.beta.range_on(lo, hi);
        Facts {
            alpha_inf,
            alpha_sup,
            alpha_at_origin: config.alpha.limit(0.0),
            beta_inf,
            beta_sup,
        }
    }

    fn beta_nonnegative(&self) -> bool {
        self.beta_inf >= 0.0
    }

    fn beta_nonpositive(&self) -> bool {
        self.beta_sup <= 0.0
    }

    fn beta_zero(&self) -> bool {
        self.beta_inf == 0.0 && self.beta_sup == 0.0
    }

    fn beta_bounded(&self) -> bool {
        self.beta_inf.is_finite() && self.beta_sup.is_finite()
    }
}

/// Growth exponent `m` of a motion of the form `A(r) ~ (1+r)^m`.
fn motion_exponent(config: &ModelConfig) -> Option<f64> {
    config.motion.growth_exponent()
}

/// `alpha >= C1 exp(-C2 r^sigma)` for some positive constants.
fn alpha_slow_decay(alpha: &CoefficientSpec, facts: &Facts, sigma: f64) -> bool {
    if facts.alpha_inf > 0.0 {
        return true;
    }
    if !(facts.alpha_at_origin > 0.0) {
        return false;
    }
    match *alpha {
        CoefficientSpec::StretchedExp { c1, c2, s } if c1 > 0.0 && c2 > 0.0 && s > 0.0 => {
            s <= sigma
        }
        _ => {
            let g = alpha.growth_exponent();
            g.is_finite() && sigma > 0.0
        }
    }
}

/// Largest `eps` with `alpha <= C exp(-r^(sigma + eps'))` for every `eps' < eps`.
fn alpha_fast_decay(alpha: &CoefficientSpec, sigma: f64) -> Option<f64> {
    match *alpha {
        CoefficientSpec::StretchedExp { c1, c2, s } if c1 > 0.0 && c2 > 0.0 && s > sigma => {
            Some(s - sigma)
        }
        _ => None,
    }
}

/// Exponent `q` with `beta >= -C(1+r)^q`; `-inf` when bounded below, `None`
/// when unbounded below near the origin.
fn beta_lower_exponent(beta: &CoefficientSpec, facts: &Facts) -> Option<f64> {
    if facts.beta_inf.is_finite() {
        return Some(f64::NEG_INFINITY);
    }
    if beta.limit(0.0) == f64::NEG_INFINITY {
        return None;
    }
    Some(beta.growth_exponent())
}

/// `alpha >= c (1+r)^q` on the whole space.
fn alpha_polynomial_lower_bound(alpha: &CoefficientSpec, facts: &Facts, q: f64) -> bool {
    facts.alpha_at_origin > 0.0 && alpha.growth_exponent() >= q
}

/// All rules that decide the compact support property of `config`,
/// exact rules first, then extension rules.
pub fn csp_rules(config: &ModelConfig) -> Vec<Verdict<Csp>> {
    let mut out = exact_csp_rules(config);
    out.extend(extension_csp_rules(config));
    out
}

fn exact_csp_rules(config: &ModelConfig) -> Vec<Verdict<Csp>> {
    if !validate_config(config).is_valid() {
        return Vec::new();
    }
    match (&config.motion, &config.domain) {
        (MotionSpec::PuncturedLine { dim }, _) => line_rules(config, *dim),
        (_, DomainKind::Punctured) => punctured_rules(config),
        (_, DomainKind::FullSpace) => full_space_rules(config),
        _ => Vec::new(),
    }
}

fn full_space_rules(config: &ModelConfig) -> Vec<Verdict<Csp>> {
    let mut out = Vec::new();
    let p = config.p;
    if !(p > 1.0 && p <= 2.0) {
        return out;
    }
    let facts = Facts::new(config);
    let Some(m) = motion_exponent(config) else {
        return out;
    };
    let d = config.d;

    if m <= 2.0 && facts.alpha_inf > 0.0 {
        out.push(Verdict::decided(
            Csp::Holds,
            rules::ALPHA_BOUNDED_BELOW,
            format!("m = {m} <= 2 and inf alpha = {:.3e} > 0", facts.alpha_inf),
        ));
    }

    if (0.0..=2.0).contains(&m) {
        let sigma = 2.0 - m;
        if alpha_slow_decay(&config.alpha, &facts, sigma) {
            out.push(Verdict::decided(
                Csp::Holds,
                rules::ALPHA_SLOW_DECAY,
                format!("alpha >= C1 exp(-C2 r^{sigma})"),
            ));
        }
        if let Some(eps) = alpha_fast_decay(&config.alpha, sigma) {
            match beta_lower_exponent(&config.beta, &facts) {
                Some(q) if q < 2.0 * eps + sigma => out.push(Verdict::decided(
                    Csp::Fails,
                    rules::ALPHA_FAST_DECAY,
                    format!("alpha <= C exp(-r^({sigma} + eps)) with eps up to {eps}; beta lower exponent {q}"),
                )),
                _ => {}
            }
        }
    }

    let alpha_bounded = facts.alpha_sup.is_finite();
    if d >= 2 && m > 2.0 && alpha_bounded && facts.beta_nonnegative() {
        out.push(Verdict::decided(
            Csp::Fails,
            rules::FAST_MOTION_BOUNDED_ALPHA,
            format!("d = {d} >= 2, m = {m} > 2, sup alpha < inf, beta >= 0"),
        ));
    }
    if d == 1 {
        if m > 1.0 + p && alpha_bounded && facts.beta_nonnegative() {
            out.push(Verdict::decided(
                Csp::Fails,
                rules::LINE_SUPERLINEAR_MOTION,
                format!("d = 1, m = {m} > 1 + p = {}", 1.0 + p),
            ));
        }
        if m <= 1.0 + p && facts.alpha_inf > 0.0 && facts.beta_nonpositive() {
            out.push(Verdict::decided(
                Csp::Holds,
                rules::LINE_SUBLINEAR_MOTION,
                format!("d = 1, m = {m} <= 1 + p = {}", 1.0 + p),
            ));
        }
    }

    if matches!(config.motion, MotionSpec::RadialPower { .. })
        && facts.beta_zero()
        && alpha_polynomial_lower_bound(&config.alpha, &facts, m - 2.0)
    {
        out.push(Verdict::decided(
            Csp::Holds,
            rules::STATIONARY_OBSTRUCTION,
            format!("beta = 0 and alpha >= c (1+r)^{}", m - 2.0),
        ));
    }
    out
}

/// Whether the punctured rules apply: `A` constant, `alpha` constant.
/// Returns `(lead, alpha)` of `u_t = lead Δu + beta u - alpha u^p`.
fn punctured_scaling(config: &ModelConfig) -> Option<(f64, f64)> {
    let lead = match config.motion {
        MotionSpec::RadialPower { m: 0.0, lead, .. } => lead,
        _ => return None,
    };
    match config.alpha {
        CoefficientSpec::Constant { c } if c > 0.0 => Some((lead, c)),
        _ => None,
    }
}

fn punctured_rules(config: &ModelConfig) -> Vec<Verdict<Csp>> {
    let mut out = Vec::new();
    if config.d < 2 {
        return out;
    }
    let Some((lead, _)) = punctured_scaling(config) else {
        return out;
    };
    let d = config.d as f64;
    let p = config.p;
    let b0 = beta0(d, p);
    let facts = Facts::new(config);
    // Time rescaling turns lead*Δ into ½Δ and beta into beta / (2 lead).
    let scale = 1.0 / (2.0 * lead);

    if facts.beta_zero() {
        out.push(if b0 < 0.0 {
            Verdict::decided(
                Csp::Fails,
                rules::PUNCTURED_CRITICAL_DIMENSION,
                format!("d = {d} < 2p/(p-1) = {}", critical_dimension(p)),
            )
        } else {
            Verdict::decided(
                Csp::Holds,
                rules::PUNCTURED_CRITICAL_DIMENSION,
                format!("d = {d} >= 2p/(p-1) = {}", critical_dimension(p)),
            )
        });
    }

    if b0 < 0.0 {
        let grid = validation_grid(0.0, f64::INFINITY);
        let inf_weighted = grid
            .iter()
            .map(|&r| r * r * config.beta.eval(r) * scale)
            .fold(f64::INFINITY, f64::min);
        if inf_weighted > b0 {
            out.push(Verdict::decided(
                Csp::Fails,
                rules::INVERSE_SQUARE_SUPERCRITICAL,
                format!("inf r^2 beta = {inf_weighted:.4} > beta0 = {b0:.4}"),
            ));
        }
        let limsup = config.beta.inverse_square_strength() * scale;
        if limsup < b0 {
            out.push(Verdict::decided(
                Csp::Holds,
                rules::INVERSE_SQUARE_SUBCRITICAL,
                format!("limsup r^2 beta = {limsup:.4} < beta0 = {b0:.4}"),
            ));
        }
    }
    out
}

/// The punctured radial problem a line chart config was built from.
pub fn punctured_config_of_line(config: &ModelConfig, dim: f64) -> Option<ModelConfig> {
    if dim.fract() != 0.0 || dim < 2.0 {
        return None;
    }
    Some(ModelConfig {
        d: dim as u32,
        motion: MotionSpec::half_radial_power(0.0),
        domain: DomainKind::Punctured,
        ..config.clone()
    })
}

fn line_rules(config: &ModelConfig, dim: f64) -> Vec<Verdict<Csp>> {
    punctured_config_of_line(config, dim)
        .map(|pc| {
            punctured_rules(&pc)
                .into_iter()
                .map(|v| {
                    let note = format!("line chart of the punctured problem: {}", v.note);
                    v.relabel(&v.source.clone(), note)
                })
                .collect()
        })
        .unwrap_or_default()
}

fn first_exact(config: &ModelConfig) -> Option<Verdict<Csp>> {
    exact_csp_rules(config).into_iter().next()
}

fn extension_csp_rules(config: &ModelConfig) -> Vec<Verdict<Csp>> {
    let mut out = Vec::new();
    if !validate_config(config).is_valid() {
        return out;
    }
    let facts = Facts::new(config);
    let zero = CoefficientSpec::constant(0.0);
    let zero_beta = config.with_beta(zero.clone());
    let base = if config.beta != zero {
        first_exact(&zero_beta)
    } else {
        None
    };

    if let Some(base) = &base {
        if base.value == Some(Csp::Holds) && facts.beta_nonpositive() {
            out.push(base.relabel(
                rules::COMPARISON,
                format!("beta <= 0 compared with beta = 0 ({})", base.source),
            ));
        }
        if base.value == Some(Csp::Fails) && facts.beta_nonnegative() {
            out.push(base.relabel(
                rules::COMPARISON,
                format!("beta >= 0 compared with beta = 0 ({})", base.source),
            ));
        }
        if facts.beta_bounded() {
            out.push(base.relabel(
                rules::BOUNDED_BETA_SHIFT,
                format!("bounded beta shift from beta = 0 ({})", base.source),
            ));
        }
    }

    if config.domain == DomainKind::FullSpace && config.p > 1.0 && config.p <= 2.0 {
        let explodes = predict_explosion(config).value == Some(Explosion::Explodes);
        if explodes && facts.beta_inf > 0.0 && facts.alpha_sup.is_finite() {
            out.push(Verdict::decided(
                Csp::Fails,
                rules::EXPLOSIVE_POSITIVE_BETA_RATIO,
                "explosive motion with inf beta/alpha > 0",
            ));
        }
        if explodes && facts.alpha_sup.is_finite() && facts.beta_inf.is_finite() {
            out.push(Verdict::decided(
                Csp::Fails,
                rules::EXPLOSIVE_BOUNDED_ALPHA,
                "explosive motion with sup alpha < inf and inf beta > -inf",
            ));
        }
    }
    out
}

/// First decisive rule in priority order, or undetermined with the unmet hypotheses.
pub fn predict_csp(config: &ModelConfig) -> Verdict<Csp> {
    let report = validate_config(config);
    if !report.is_valid() {
        return Verdict::undetermined(
            rules::NONE,
            report
                .violations
                .iter()
                .map(|v| format!("invalid {}: {}", v.field, v.message))
                .collect(),
        );
    }
    if let Some(v) = csp_rules(config).into_iter().next() {
        return v;
    }
    let mut unmet = Vec::new();
    match config.domain {
        DomainKind::Ball { .. } | DomainKind::Annulus { .. } => {
            unmet.push("rules are stated for the full or punctured space".to_string())
        }
        DomainKind::Punctured if punctured_scaling(config).is_none() => {
            unmet.push("punctured rules need A constant and alpha constant".to_string())
        }
        _ => {}
    }
    if !(config.p <= 2.0) && config.domain == DomainKind::FullSpace {
        unmet.push(format!("p = {} outside (1, 2]", config.p));
    }
    if let Some(m) = motion_exponent(config) {
        if (0.0..=2.0).contains(&m) {
            let sigma = 2.0 - m;
            let facts = Facts::new(config);
            if let Some(eps) = alpha_fast_decay(&config.alpha, sigma) {
                if let Some(q) = beta_lower_exponent(&config.beta, &facts) {
                    if q == 2.0 * eps + sigma {
                        unmet.push(format!(
                            "beta lower exponent {q} sits exactly at the boundary delta = eps"
                        ));
                    }
                }
            }
        }
    }
    unmet.push("no classification rule matches the coefficient families".to_string());
    Verdict::undetermined(rules::NONE, unmet)
}

/// Explosion of the underlying diffusion.
pub fn predict_explosion(config: &ModelConfig) -> Verdict<Explosion> {
    match config.motion {
        MotionSpec::RadialPower { m, .. } => {
            if m <= 2.0 {
                Verdict::decided(
                    Explosion::Conservative,
                    rules::LINEAR_GROWTH_CONSERVATIVE,
                    format!("m = {m} <= 2: coefficients grow at most quadratically"),
                )
            } else if config.d >= 3 {
                Verdict::decided(
                    Explosion::Explodes,
                    rules::RADIAL_POWER_EXPLOSION,
                    format!("m = {m} > 2 and d = {} >= 3", config.d),
                )
            } else if config.d == 2 {
                let mut v =
                    Verdict::undetermined(rules::NONE, vec![format!("m = {m} > 2 needs d >= 3")]);
                v.note = format!(
                    "m = {m} > 2, d = 2: time change of recurrent two-dimensional Brownian motion, hence non-explosive"
                );
                v
            } else {
                Verdict::undetermined(rules::NONE, vec![format!("m = {m} > 2 needs d >= 3")])
            }
        }
        MotionSpec::Table { .. } => Verdict::decided(
            Explosion::Conservative,
            rules::LINEAR_GROWTH_CONSERVATIVE,
            "tabulated coefficient is bounded",
        ),
        MotionSpec::PuncturedLine { .. } => Verdict::decided(
            Explosion::Conservative,
            rules::LINEAR_GROWTH_CONSERVATIVE,
            "chart of a non-explosive punctured Brownian motion",
        ),
    }
}

/// Point hitting for the full-space process, `½Δ`-type motion and constant alpha.
pub fn predict_point_hitting(config: &ModelConfig) -> Result<Verdict<Hitting>> {
    if config.d < 2 {
        return Err(Error::DimensionTooSmall(config.d));
    }
    let Some((lead, _)) = punctured_scaling(config) else {
        return Ok(Verdict::undetermined(
            rules::NONE,
            vec!["hitting rules need A constant and alpha constant".to_string()],
        ));
    };
    if !matches!(config.domain, DomainKind::FullSpace | DomainKind::Punctured) {
        return Ok(Verdict::undetermined(
            rules::NONE,
            vec!["hitting rules are stated on the full space".to_string()],
        ));
    }
    let d = config.d as f64;
    let p = config.p;
    let b0 = beta0(d, p);
    let facts = Facts::new(config);
    let scale = 1.0 / (2.0 * lead);
    let subcritical = b0 < 0.0;

    if subcritical && facts.beta_inf.is_finite() {
        return Ok(Verdict::decided(
            Hitting::Hits,
            rules::PUNCTURED_CRITICAL_DIMENSION,
            format!(
                "beta bounded below and d = {d} < 2p/(p-1) = {}",
                critical_dimension(p)
            ),
        ));
    }
    if !subcritical && facts.beta_nonpositive() {
        return Ok(Verdict::decided(
            Hitting::Never,
            rules::PUNCTURED_CRITICAL_DIMENSION,
            format!(
                "beta <= 0 and d = {d} >= 2p/(p-1) = {}",
                critical_dimension(p)
            ),
        ));
    }
    if subcritical && facts.beta_nonpositive() {
        let limsup = config.beta.inverse_square_strength() * scale;
        if limsup < b0 {
            return Ok(Verdict::decided(
                Hitting::Never,
                rules::INVERSE_SQUARE_SUBCRITICAL,
                format!("beta <= 0 and limsup r^2 beta = {limsup:.4} < beta0 = {b0:.4}"),
            ));
        }
        let punctured = config.with_domain(DomainKind::Punctured);
        if let Some(v) = punctured_rules(&punctured)
            .into_iter()
            .find(|v| v.source == rules::INVERSE_SQUARE_SUPERCRITICAL)
        {
            return Ok(Verdict::decided(
                Hitting::Hits,
                rules::INVERSE_SQUARE_SUPERCRITICAL,
                format!("beta <= 0 (local extinction) and {}", v.note),
            ));
        }
    }
    Ok(Verdict::undetermined(
        rules::NONE,
        vec![format!(
            "beta range [{}, {}] matches no hitting rule at beta0 = {b0:.4}",
            facts.beta_inf, facts.beta_sup
        )],
    ))
}

fn same_problem(a: &ModelConfig, b: &ModelConfig) -> Option<String> {
    if a.motion != b.motion || a.d != b.d || a.p != b.p || a.domain != b.domain {
        Some("configs differ in motion, dimension, power or domain".to_string())
    } else {
        None
    }
}

/// Propagates a verdict along the pointwise order of the coefficients:
/// `Holds` moves to larger alpha and smaller beta, `Fails` the other way.
/// When both betas are bounded, beta is first shifted away and only alpha is compared.
pub fn comparison_extend(
    base_verdict: &Verdict<Csp>,
    config_base: &ModelConfig,
    config_new: &ModelConfig,
) -> Verdict<Csp> {
    if let Some(why) = same_problem(config_base, config_new) {
        return Verdict::undetermined(rules::COMPARISON, vec![why]);
    }
    let Some(value) = base_verdict.value else {
        return Verdict::undetermined(rules::COMPARISON, vec!["base verdict undetermined".into()]);
    };
    let (lo, hi) = config_base.domain.radius_interval();
    let grid = validation_grid(lo, hi);
    let all = |f: &dyn Fn(f64) -> bool| grid.iter().all(|&r| f(r));
    let (a0, a1) = (&config_base.alpha, &config_new.alpha);
    let (b0, b1) = (&config_base.beta, &config_new.beta);

    let alpha_up = all(&|r| a1.eval(r) >= a0.eval(r));
    let alpha_down = all(&|r| a1.eval(r) <= a0.eval(r));
    let beta_up = all(&|r| b1.eval(r) >= b0.eval(r));
    let beta_down = all(&|r| b1.eval(r) <= b0.eval(r));
    let bounded = |b: &CoefficientSpec| {
        let (i, s) = b.range_on(lo, hi);
        i.is_finite() && s.is_finite()
    };
    let shift = bounded(b0) && bounded(b1);

    let ok = match value {
        Csp::Holds => alpha_up && (beta_down || shift),
        Csp::Fails => alpha_down && (beta_up || shift),
    };
    if ok {
        let how =
            if matches!(value, Csp::Holds) && beta_down || matches!(value, Csp::Fails) && beta_up {
                "pointwise order of alpha and beta"
            } else {
                "bounded beta shift, then pointwise order of alpha"
            };
        Verdict::decided(
            value,
            rules::COMPARISON,
            format!("{how} from {}", base_verdict.source),
        )
    } else {
        Verdict::undetermined(
            rules::COMPARISON,
            vec!["coefficients are not ordered in the direction the verdict propagates".into()],
        )
    }
}

/// Copies the verdict of `base` to the config with beta replaced by `shifted_beta`,
/// provided the two betas differ by at most `shift_bound` on the validation grid.
pub fn beta_shift_invariance(
    base: &ModelConfig,
    shifted_beta: &CoefficientSpec,
    shift_bound: f64,
) -> Result<Verdict<Csp>> {
    let (lo, hi) = base.domain.radius_interval();
    let found = validation_grid(lo, hi)
        .iter()
        .map(|&r| (base.beta.eval(r) - shifted_beta.eval(r)).abs())
        .fold(0.0, f64::max);
    let ends_bounded = [lo, hi].iter().all(|&r| {
        let a = base.beta.limit(r);
        let b = shifted_beta.limit(r);
        (a.is_finite() && b.is_finite()) || a == b && base.beta == *shifted_beta
    });
    if !(found <= shift_bound) || !ends_bounded {
        return Err(Error::UnboundedShift {
            found,
            bound: shift_bound,
        });
    }
    let v = predict_csp(base);
    Ok(match v.value {
        Some(_) => v.relabel(
            rules::BOUNDED_BETA_SHIFT,
            format!("shift of at most {found:.3e} from {}", v.source),
        ),
        None => {
            let mut u = v;
            u.source = rules::BOUNDED_BETA_SHIFT.to_string();
            u
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn radial(
        d: u32,
        p: f64,
        m: f64,
        alpha: CoefficientSpec,
        beta: CoefficientSpec,
    ) -> ModelConfig {
        ModelConfig::radial(d, p, m, alpha, beta)
    }

    fn c(v: f64) -> CoefficientSpec {
        CoefficientSpec::constant(v)
    }

    #[test]
    fn beta0_values() {
        assert_eq!(beta0(3.0, 2.0), -1.0);
        assert_eq!(beta0(2.0, 2.0), -2.0);
        assert_eq!(beta0(4.0, 2.0), 0.0);
    }

    #[test]
    fn explosion_predictions() {
        let cfg = |m, d| radial(d, 2.0, m, c(1.0), c(0.0));
        assert_eq!(
            predict_explosion(&cfg(2.0, 5)).value,
            Some(Explosion::Conservative)
        );
        assert_eq!(
            predict_explosion(&cfg(3.0, 3)).value,
            Some(Explosion::Explodes)
        );
        let v = predict_explosion(&cfg(3.0, 2));
        assert_eq!(v.value, None);
        assert!(v.note.contains("recurrent"));
    }

    #[test]
    fn slow_and_fast_decay() {
        for m in [0.0, 1.0, 2.0] {
            let holds = radial(
                2,
                2.0,
                m,
                CoefficientSpec::stretched_exp(1.0, 1.0, 2.0 - m),
                c(3.0),
            );
            let v = predict_csp(&holds);
            assert_eq!(v.value, Some(Csp::Holds), "m = {m}: {v:?}");
            let fails = radial(
                2,
                2.0,
                m,
                CoefficientSpec::stretched_exp(1.0, 1.0, 2.5 - m),
                c(0.0),
            );
            let v = predict_csp(&fails);
            assert_eq!(v.value, Some(Csp::Fails), "m = {m}: {v:?}");
            assert_eq!(v.source, rules::ALPHA_FAST_DECAY);
        }
    }

    #[test]
    fn boundary_delta_equal_eps_is_undetermined() {
        // s = 2.5, sigma = 2, eps = 0.5: beta >= -C(1+r)^q is allowed for q < 3.
        let cfg = radial(
            2,
            2.0,
            0.0,
            CoefficientSpec::stretched_exp(1.0, 1.0, 2.5),
            CoefficientSpec::neg_power(1.0, 3.0),
        );
        let v = predict_csp(&cfg);
        assert_eq!(v.value, None);
        assert!(v.unmet.iter().any(|u| u.contains("delta = eps")));
        let below = cfg.with_beta(CoefficientSpec::neg_power(1.0, 2.9));
        assert_eq!(predict_csp(&below).value, Some(Csp::Fails));
    }

    #[test]
    fn line_motion_depends_on_p() {
        let cfg = radial(1, 2.0, 2.8, c(1.0), c(0.0));
        let v = predict_csp(&cfg);
        assert_eq!(
            (v.value, v.source.as_str()),
            (Some(Csp::Holds), rules::LINE_SUBLINEAR_MOTION)
        );
        let cfg = ModelConfig { p: 1.5, ..cfg };
        let v = predict_csp(&cfg);
        assert_eq!(
            (v.value, v.source.as_str()),
            (Some(Csp::Fails), rules::LINE_SUPERLINEAR_MOTION)
        );
    }

    #[test]
    fn stationary_obstruction_despite_explosion() {
        let cfg = radial(3, 2.0, 3.0, CoefficientSpec::power_law(1.0, 1.0), c(0.0));
        let v = predict_csp(&cfg);
        assert_eq!(
            (v.value, v.source.as_str()),
            (Some(Csp::Holds), rules::STATIONARY_OBSTRUCTION)
        );
        assert_eq!(predict_explosion(&cfg).value, Some(Explosion::Explodes));
    }

    #[test]
    fn explosive_bounded_alpha_fails() {
        let cfg = radial(3, 2.0, 3.0, c(1.0), CoefficientSpec::neg_power(1.0, 0.0));
        let v = predict_csp(&cfg);
        assert_eq!(v.value, Some(Csp::Fails));
    }

    #[test]
    fn point_hitting_examples() {
        let bm = |d, beta| ModelConfig {
            domain: DomainKind::FullSpace,
            ..ModelConfig::punctured_brownian(d, 2.0, beta)
        };
        let v = predict_point_hitting(&bm(3, c(0.0))).unwrap();
        assert_eq!(v.value, Some(Hitting::Hits));
        let v = predict_point_hitting(&bm(4, c(0.0))).unwrap();
        assert_eq!(v.value, Some(Hitting::Never));
        let v = predict_point_hitting(&bm(3, CoefficientSpec::inverse_square(-1.5))).unwrap();
        assert_eq!(v.value, Some(Hitting::Never));
        assert_eq!(v.source, rules::INVERSE_SQUARE_SUBCRITICAL);
        assert!(matches!(
            predict_point_hitting(&bm(1, c(0.0))),
            Err(Error::DimensionTooSmall(1))
        ));
    }

    #[test]
    fn punctured_threshold() {
        let cfg = |beta| ModelConfig::punctured_brownian(3, 2.0, beta);
        let v = predict_csp(&cfg(CoefficientSpec::inverse_square(-0.5)));
        assert_eq!(v.value, Some(Csp::Fails));
        assert_eq!(v.source, rules::INVERSE_SQUARE_SUPERCRITICAL);
        let v = predict_csp(&cfg(CoefficientSpec::inverse_square(-2.0)));
        assert_eq!(v.value, Some(Csp::Holds));
        let v = predict_csp(&ModelConfig::punctured_brownian(4, 2.0, c(0.0)));
        assert_eq!(v.value, Some(Csp::Holds));
    }

    #[test]
    fn line_chart_inherits_punctured_verdict() {
        let mut cfg = ModelConfig::punctured_brownian(3, 2.0, c(0.0));
        cfg.motion = MotionSpec::PuncturedLine { dim: 3.0 };
        cfg.domain = DomainKind::FullSpace;
        assert_eq!(predict_csp(&cfg).value, Some(Csp::Fails));
        assert_eq!(predict_explosion(&cfg).value, Some(Explosion::Conservative));
    }

    #[test]
    fn comparison_examples() {
        let base = radial(2, 2.0, 0.0, c(1.0), c(0.0));
        let holds = Verdict::decided(Csp::Holds, "test", "");
        let v = comparison_extend(&holds, &base, &radial(2, 2.0, 0.0, c(2.0), c(-1.0)));
        assert_eq!(v.value, Some(Csp::Holds));
        let fails = Verdict::decided(Csp::Fails, "test", "");
        let v = comparison_extend(&fails, &base, &radial(2, 2.0, 0.0, c(0.5), c(1.0)));
        assert_eq!(v.value, Some(Csp::Fails));
        let crossing = radial(2, 2.0, 0.0, CoefficientSpec::power_law(2.0, -1.0), c(0.0));
        let v = comparison_extend(&holds, &base, &crossing);
        assert_eq!(v.value, None);
        assert!(!v.unmet.is_empty());
    }

    #[test]
    fn shift_invariance_examples() {
        let base = radial(2, 2.0, 0.0, c(1.0), c(0.0));
        let v = beta_shift_invariance(&base, &c(5.0), 5.0).unwrap();
        assert_eq!(v.value, predict_csp(&base).value);
        assert_eq!(v.source, rules::BOUNDED_BETA_SHIFT);
        let err = beta_shift_invariance(&base, &CoefficientSpec::neg_power(1.0, 0.5), 10.0);
        assert!(matches!(err, Err(Error::UnboundedShift { .. })));
        let fast = radial(
            2,
            2.0,
            0.0,
            CoefficientSpec::stretched_exp(1.0, 1.0, 2.5),
            c(0.0),
        );
        let v = beta_shift_invariance(&fast, &c(1.0), 1.0).unwrap();
        assert_eq!(v.value, Some(Csp::Fails));
        assert_eq!(predict_csp(&fast.with_beta(c(1.0))).value, Some(Csp::Fails));
    }

    #[test]
    fn csv_row_layout() {
        let v: Verdict<Csp> = Verdict::undetermined(rules::NONE, vec!["a".into(), "b".into()]);
        assert_eq!(v.csv_row("abc"), ["abc", "Undetermined", "none", "a; b"]);
    }
}
