use rayon::prelude::*;

use super::blowup::{solve_blowup_ball, BlowupSolution, Discretisation};
use super::classify::umax_classify;
use crate::error::{Error, Result};
use crate::model::{validation_grid, CoefficientSpec, ModelConfig};
use crate::theory::{Csp, Verdict};

/// Relative slack allowed in pointwise comparisons.
pub const COMPARISON_TOL: f64 = 1e-4;
/// Nodes beyond this fraction of the ball radius sit in the artificial boundary layer.
const INTERIOR_FRACTION: f64 = 0.9;
const FLOOR: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct ComparisonReport {
    /// Largest `(u1 - u2) / u2` over interior nodes of every ball and output time.
    pub max_excess: f64,
    pub fields_ordered: bool,
    pub verdict1: Verdict<Csp>,
    pub verdict2: Verdict<Csp>,
    /// Uniqueness for config 2 carries over to config 1, and failure for config 1 to config 2.
    pub verdicts_consistent: bool,
}

fn same_problem(c1: &ModelConfig, c2: &ModelConfig) -> Result<()> {
    if c1.d != c2.d || c1.p != c2.p || c1.motion != c2.motion || c1.horizon != c2.horizon {
        return Err(Error::Precondition(
            "compared configs must share d, p, motion and horizon".into(),
        ));
    }
    Ok(())
}

/// Largest `(upper - lower)`-violation `(a - b)/max(b, floor)` over interior nodes and output times.
fn excess(a: &BlowupSolution, b: &BlowupSolution, radius: f64) -> f64 {
    let mut worst = f64::NEG_INFINITY;
    for (ra, rb) in a.field.values.iter().zip(&b.field.values).skip(1) {
        for (i, &r) in a.field.r.iter().enumerate() {
            if r > INTERIOR_FRACTION * radius {
                break;
            }
            let (x, y) = (ra[i], rb[i]);
            worst = worst.max((x - y) / y.max(FLOOR));
        }
    }
    worst
}

fn solve_pairs(
    c1: &ModelConfig,
    c2: &ModelConfig,
    radii: &[f64],
    disc: &Discretisation,
) -> Result<Vec<(BlowupSolution, BlowupSolution)>> {
    radii
        .par_iter()
        .map(|&m| {
            Ok((
                solve_blowup_ball(c1, m, disc)?,
                solve_blowup_ball(c2, m, disc)?,
            ))
        })
        .collect()
}

/// Checks `u_m[config1] <= u_m[config2]` when `α1 >= α2` and `β1 <= β2`,
/// and that the classifier verdicts respect the same direction.
pub fn compare_solutions_monotonicity(
    config1: &ModelConfig,
    config2: &ModelConfig,
    radii: &[f64],
    probe: (f64, f64),
    disc: &Discretisation,
) -> Result<ComparisonReport> {
    same_problem(config1, config2)?;
    let top = radii.last().copied().unwrap_or(0.0);
    for r in validation_grid(0.0, top) {
        let (a1, a2) = (config1.alpha.eval(r), config2.alpha.eval(r));
        let (b1, b2) = (config1.beta.eval(r), config2.beta.eval(r));
        if a1 < a2 || b1 > b2 {
            return Err(Error::HypothesisUnmet(format!(
                "need alpha1 >= alpha2 and beta1 <= beta2; at r = {r}: alpha ({a1}, {a2}), beta ({b1}, {b2})"
            )));
        }
    }
    let pairs = solve_pairs(config1, config2, radii, disc)?;
    let max_excess = pairs
        .iter()
        .zip(radii)
        .map(|((a, b), &m)| excess(a, b, m))
        .fold(f64::NEG_INFINITY, f64::max);
    let verdict1 = umax_classify(config1, radii, probe, disc)?.verdict;
    let verdict2 = umax_classify(config2, radii, probe, disc)?.verdict;
    let verdicts_consistent =
        !(verdict2.value == Some(Csp::Holds) && verdict1.value == Some(Csp::Fails));
    Ok(ComparisonReport {
        max_excess,
        fields_ordered: max_excess <= COMPARISON_TOL,
        verdict1,
        verdict2,
        verdicts_consistent,
    })
}

#[derive(Clone, Debug)]
pub struct ShiftReport {
    /// Smallest `(e^{Bt} u1 - u2) / u2` over interior nodes, balls and output times.
    pub min_margin: f64,
    pub inequality_holds: bool,
    pub verdict1: Verdict<Csp>,
    pub verdict2: Verdict<Csp>,
    pub verdicts_agree: bool,
}

/// With `β2 <= β1 + B`, checks `e^{Bt} u_m^{(1)} >= u_m^{(2)}` and that both
/// configs receive the same classification.
pub fn theorem2_shift_check(
    config: &ModelConfig,
    beta2: &CoefficientSpec,
    shift: f64,
    radii: &[f64],
    probe: (f64, f64),
    disc: &Discretisation,
) -> Result<ShiftReport> {
    if !(shift >= 0.0) {
        return Err(Error::Precondition(format!(
            "shift must be non-negative (got {shift})"
        )));
    }
    let top = radii.last().copied().unwrap_or(0.0);
    for r in validation_grid(0.0, top) {
        let (b1, b2) = (config.beta.eval(r), beta2.eval(r));
        if b2 > b1 + shift {
            return Err(Error::HypothesisUnmet(format!(
                "beta2 = {b2} exceeds beta1 + B = {} at r = {r}",
                b1 + shift
            )));
        }
    }
    let config2 = config.with_beta(beta2.clone());
    let disc = Discretisation {
        outputs: disc.outputs.max(4),
        ..disc.clone()
    };
    let pairs = solve_pairs(config, &config2, radii, &disc)?;
    let mut min_margin = f64::INFINITY;
    for ((u1, u2), &m) in pairs.iter().zip(radii) {
        for ((t, a), b) in u1
            .field
            .times
            .iter()
            .zip(&u1.field.values)
            .zip(&u2.field.values)
            .skip(1)
        {
            let growth = (shift * t).exp();
            for (i, &r) in u1.field.r.iter().enumerate() {
                if r > INTERIOR_FRACTION * m {
                    break;
                }
                min_margin = min_margin.min((growth * a[i] - b[i]) / b[i].max(FLOOR));
            }
        }
    }
    let verdict1 = umax_classify(config, radii, probe, &disc)?.verdict;
    let verdict2 = umax_classify(&config2, radii, probe, &disc)?.verdict;
    Ok(ShiftReport {
        min_margin,
        inequality_holds: min_margin >= -COMPARISON_TOL,
        verdicts_agree: verdict1.value == verdict2.value,
        verdict1,
        verdict2,
    })
}
