use rayon::prelude::*;

use super::blowup::{solve_blowup_annulus, solve_blowup_ball, Discretisation};
use crate::error::{Error, Result};
use crate::model::{ModelConfig, MotionSpec};
use crate::theory::{Csp, Hitting, Verdict};

/// Probe values below this count as zero.
pub const ZERO_TOL: f64 = 1e-6;
/// Relative change across the last radii that counts as a plateau.
pub const PLATEAU_TOL: f64 = 1e-2;
const PLATEAU_SPAN: usize = 3;
const MONOTONE_TOL: f64 = 1e-4;
/// Smallest decay slope `-d ln u / d ln(1/ε)` read as convergence to zero.
const TREND_SLOPE: f64 = 0.02;
/// Slopes shrinking faster than this ratio per ε step belong to a converging sequence.
const TREND_RATIO: f64 = 0.8;

pub const UMAX_SOURCE: &str = "pde-umax";
pub const PUNCTURED_SOURCE: &str = "pde-punctured";
pub const LINE_SOURCE: &str = "pde-line";

#[derive(Clone, Debug)]
pub struct UmaxReport {
    pub verdict: Verdict<Csp>,
    /// `(m, u_m(x0, t))` over the ladder.
    pub sequence: Vec<(f64, f64)>,
    /// Sequence non-increasing in `m` within tolerance.
    pub monotone: bool,
}

impl UmaxReport {
    /// Rows `(config-hash, m, probe_u, verdict)`.
    pub fn csv_rows(&self, hash: &str) -> Vec<[String; 4]> {
        self.sequence
            .iter()
            .map(|(m, u)| {
                [
                    hash.to_string(),
                    m.to_string(),
                    u.to_string(),
                    self.verdict.label().to_string(),
                ]
            })
            .collect()
    }
}

fn with_horizon(config: &ModelConfig, t: f64) -> ModelConfig {
    ModelConfig {
        horizon: t,
        ..config.clone()
    }
}

/// Probes `u_m(x0, t)` on an increasing ladder of balls and classifies the limit.
pub fn umax_classify(
    config: &ModelConfig,
    radii: &[f64],
    probe: (f64, f64),
    disc: &Discretisation,
) -> Result<UmaxReport> {
    let (x0, t) = probe;
    if radii.is_empty() || radii.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Precondition("ball radii must be increasing".into()));
    }
    if !(x0 >= 0.0 && x0 < radii[0]) || !(t > 0.0) {
        return Err(Error::Precondition(format!(
            "probe ({x0}, {t}) must lie inside the smallest ball at a positive time"
        )));
    }
    let cfg = with_horizon(config, t);
    let values: Vec<f64> = radii
        .par_iter()
        .map(|&m| solve_blowup_ball(&cfg, m, disc).map(|s| s.at(x0, t)))
        .collect::<Result<_>>()?;
    let sequence: Vec<(f64, f64)> = radii.iter().copied().zip(values.iter().copied()).collect();
    let monotone = values
        .windows(2)
        .all(|w| w[1] <= w[0] * (1.0 + MONOTONE_TOL) + 1e-14);
    Ok(UmaxReport {
        verdict: classify_sequence(&values),
        sequence,
        monotone,
    })
}

fn classify_sequence(values: &[f64]) -> Verdict<Csp> {
    let last = *values.last().unwrap();
    if last < ZERO_TOL {
        return Verdict::decided(
            Csp::Holds,
            UMAX_SOURCE,
            format!("u_m(x0, t) -> {last:.3e} < {ZERO_TOL:e}"),
        );
    }
    if values.len() >= PLATEAU_SPAN && last > 10.0 * ZERO_TOL {
        let change = values[values.len() - PLATEAU_SPAN..]
            .iter()
            .map(|v| (v - last).abs() / last)
            .fold(0.0, f64::max);
        if change < PLATEAU_TOL {
            return Verdict::decided(
                Csp::Fails,
                UMAX_SOURCE,
                format!("u_m(x0, t) plateaus at {last:.4e} (relative change {change:.2e})"),
            );
        }
    }
    Verdict::undetermined(
        UMAX_SOURCE,
        vec![format!(
            "sequence neither below {ZERO_TOL:e} nor flat: last value {last:.3e}"
        )],
    )
}

/// `exp(-u_m(x0, t))`: the probability that the support started from `δ_{x0}`
/// stays inside the ball of radius `m` up to time `t`.
pub fn csp_probability(
    config: &ModelConfig,
    m: f64,
    t: f64,
    x0: f64,
    disc: &Discretisation,
) -> Result<f64> {
    if !(x0 >= 0.0 && x0 < m) {
        return Err(Error::Precondition(format!(
            "x0 = {x0} must lie inside the ball of radius {m}"
        )));
    }
    if t == 0.0 {
        return Ok(1.0);
    }
    let sol = solve_blowup_ball(&with_horizon(config, t), m, disc)?;
    Ok((-sol.at(x0, t)).exp())
}

#[derive(Clone, Debug)]
pub struct PuncturedReport {
    pub verdict: Verdict<Hitting>,
    /// `(ε, R, u(probe))` for every annulus.
    pub table: Vec<(f64, f64, f64)>,
    /// `(ε, u)` at the largest outer radius.
    pub limits: Vec<(f64, f64)>,
    /// Decay slopes `-Δ ln u / Δ ln(1/ε)` between consecutive ε.
    pub slopes: Vec<f64>,
}

/// Blow-up at both ends of `(ε, R)`; classifies the double limit `R → ∞`, `ε → 0`.
/// A non-trivial limit means the point is hit.
pub fn punctured_classify(
    config: &ModelConfig,
    eps: &[f64],
    outer: &[f64],
    probe: (f64, f64),
    disc: &Discretisation,
) -> Result<PuncturedReport> {
    let dim = match config.motion {
        MotionSpec::PuncturedLine { dim } => dim,
        _ => config.d as f64,
    };
    let source = match config.motion {
        MotionSpec::PuncturedLine { .. } => LINE_SOURCE,
        _ => PUNCTURED_SOURCE,
    };
    if dim < 2.0 {
        return Err(Error::DimensionTooSmall(dim as u32));
    }
    if eps.len() < PLATEAU_SPAN || outer.is_empty() {
        return Err(Error::LadderTooCoarse(format!(
            "need at least {PLATEAU_SPAN} inner radii and one outer radius"
        )));
    }
    if eps.windows(2).any(|w| !(w[1] < w[0])) || outer.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Precondition(
            "inner radii must decrease and outer radii increase".into(),
        ));
    }
    let (r0, t) = probe;
    if !(r0 > eps[0] && r0 < outer[0]) || !(t > 0.0) {
        return Err(Error::Precondition(format!(
            "probe ({r0}, {t}) must lie inside every annulus"
        )));
    }
    let cfg = with_horizon(config, t);
    let pairs: Vec<(f64, f64)> = eps
        .iter()
        .flat_map(|&e| outer.iter().map(move |&r| (e, r)))
        .collect();
    let table: Vec<(f64, f64, f64)> = pairs
        .par_iter()
        .map(|&(e, r)| solve_blowup_annulus(&cfg, e, r, disc).map(|s| (e, r, s.at(r0, t))))
        .collect::<Result<_>>()?;

    let mut limits = Vec::with_capacity(eps.len());
    for chunk in table.chunks(outer.len()) {
        let (e, _, last) = *chunk.last().unwrap();
        if chunk.len() >= 2 {
            let prev = chunk[chunk.len() - 2].2;
            if (prev - last).abs() > PLATEAU_TOL * last.max(ZERO_TOL) {
                return Err(Error::LadderTooCoarse(format!(
                    "outer radii not converged at eps = {e:e}: {prev:.4e} vs {last:.4e}"
                )));
            }
        }
        limits.push((e, last));
    }
    let slopes: Vec<f64> = limits
        .windows(2)
        .map(|w| -(w[1].1.ln() - w[0].1.ln()) / (w[0].0.ln() - w[1].0.ln()))
        .collect();
    let verdict = classify_trend(&limits, &slopes, source);
    Ok(PuncturedReport {
        verdict,
        table,
        limits,
        slopes,
    })
}

fn classify_trend(limits: &[(f64, f64)], slopes: &[f64], source: &str) -> Verdict<Hitting> {
    let last = limits.last().unwrap().1;
    if last < ZERO_TOL {
        return Verdict::decided(
            Hitting::Never,
            source,
            format!("limit {last:.3e} below {ZERO_TOL:e}"),
        );
    }
    let n = slopes.len();
    let (s_last, s_prev) = (slopes[n - 1], slopes[n - 2]);
    let ratio = if s_prev > 0.0 { s_last / s_prev } else { 0.0 };
    let change = (limits[limits.len() - 2].1 - last).abs() / last;
    if s_last >= TREND_SLOPE && ratio >= TREND_RATIO {
        return Verdict::decided(
            Hitting::Never,
            source,
            format!("u decays steadily as eps -> 0: slope {s_last:.3} (ratio {ratio:.2})"),
        );
    }
    if change < PLATEAU_TOL {
        return Verdict::decided(
            Hitting::Hits,
            source,
            format!("non-trivial limit {last:.4e} (relative change {change:.2e}, slope ratio {ratio:.2})"),
        );
    }
    Verdict::undetermined(
        source,
        vec![format!(
            "no clear trend: last value {last:.3e}, slope {s_last:.3}, ratio {ratio:.2}, change {change:.2e}"
        )],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::CoefficientSpec;

    fn limits(values: &[f64]) -> Vec<(f64, f64)> {
        values
            .iter()
            .enumerate()
            .map(|(i, &v)| (10f64.powi(-(i as i32) - 2), v))
            .collect()
    }

    fn slopes(l: &[(f64, f64)]) -> Vec<f64> {
        l.windows(2)
            .map(|w| -(w[1].1.ln() - w[0].1.ln()) / (w[0].0.ln() - w[1].0.ln()))
            .collect()
    }

    #[test]
    fn logarithmic_decay_is_trivial() {
        let l = limits(&(2..9).map(|k| 1.0 / k as f64).collect::<Vec<_>>());
        let v = classify_trend(&l, &slopes(&l), PUNCTURED_SOURCE);
        assert_eq!(v.value, Some(Hitting::Never), "{}", v.note);
    }

    #[test]
    fn geometric_convergence_is_nontrivial() {
        let l = limits(
            &(2..9)
                .map(|k| 0.7 + 0.3 * 10f64.powi(-k))
                .collect::<Vec<_>>(),
        );
        let v = classify_trend(&l, &slopes(&l), PUNCTURED_SOURCE);
        assert_eq!(v.value, Some(Hitting::Hits), "{}", v.note);
    }

    #[test]
    fn sequence_rules() {
        assert_eq!(
            classify_sequence(&[1e-3, 1e-5, 1e-7]).value,
            Some(Csp::Holds)
        );
        assert_eq!(
            classify_sequence(&[0.5, 0.4001, 0.4, 0.4]).value,
            Some(Csp::Fails)
        );
        assert_eq!(classify_sequence(&[0.5, 0.3, 0.1]).value, None);
    }

    #[test]
    fn csp_probability_at_time_zero() {
        let cfg = ModelConfig::radial(
            2,
            2.0,
            0.0,
            CoefficientSpec::constant(1.0),
            CoefficientSpec::constant(0.0),
        );
        assert_eq!(
            csp_probability(&cfg, 2.0, 0.0, 0.0, &Discretisation::default()).unwrap(),
            1.0
        );
        let small = csp_probability(&cfg, 2.0, 1e-3, 0.0, &Discretisation::default()).unwrap();
        assert!(small > 0.999999, "{small}");
    }

    #[test]
    fn punctured_needs_two_dimensions() {
        let cfg = ModelConfig::punctured_brownian(1, 2.0, CoefficientSpec::constant(0.0));
        let res = punctured_classify(
            &cfg,
            &[1e-2, 1e-3, 1e-4],
            &[4.0],
            (1.0, 1.0),
            &Discretisation::default(),
        );
        assert!(matches!(res, Err(Error::DimensionTooSmall(1))));
    }
}
