use super::RadialGenerator;
use crate::error::{Error, Result};
use crate::theory::{Explosion, Verdict};

/// Relative Cauchy increment below which the Feller integral counts as converged.
pub const CONVERGENCE_TOL: f64 = 1e-3;
const GROWTH_RATIO: f64 = 0.95;
const LADDER_TAIL: usize = 3;

pub const SOURCE: &str = "feller-integral";

#[derive(Clone, Debug)]
pub struct FellerReport {
    pub verdict: Verdict<Explosion>,
    /// `(R_k, v(R_k))` on the ladder `R_k = anchor * 10^k`.
    pub ladder: Vec<(f64, f64)>,
}

/// Feller test at `+inf` for `P u'' + Q u'`.
///
/// Evaluates `v(R) = ∫_{r0}^{R} s'(r) ∫_{r0}^{r} dρ / (P(ρ) s'(ρ)) dr` with
/// `s' = exp(-∫ Q/P)` on the ladder `R_k = r0 * 10^k`, `R_k <= outer`.
/// The integration runs in `x = ln r` and carries `J = s' ∫ 1/(P s')`,
/// which obeys the linear equation `J' = -(rQ/P) J + r/P`; each cell is
/// integrated exactly for frozen coefficients, so no exponential overflows.
pub fn feller_explosion_test(
    gen: &RadialGenerator,
    anchor: f64,
    outer: f64,
    steps_per_decade: usize,
) -> Result<FellerReport> {
    if !(anchor > 0.0 && outer > anchor * 1e3) || steps_per_decade < 4 {
        return Err(Error::Precondition(
            "Feller test needs 0 < anchor, outer >= 1000 * anchor and at least 4 steps per decade"
                .into(),
        ));
    }
    let decades = (outer / anchor).log10().floor() as usize;
    let h = std::f64::consts::LN_10 / steps_per_decade as f64;
    let x0 = anchor.ln();

    let mut j = 0.0;
    let mut v = 0.0;
    let mut ladder = Vec::with_capacity(decades);
    for k in 0..decades {
        for i in 0..steps_per_decade {
            let xa = x0 + h * (k * steps_per_decade + i) as f64;
            let (ra, rb, rm) = (xa.exp(), (xa + h).exp(), (xa + 0.5 * h).exp());
            let (p, q) = (gen.p(rm), gen.q(rm));
            let ds = rm * q / p * h;
            let g = rm / p;
            if !(ds.is_finite() && g.is_finite() && p > 0.0) {
                return Err(Error::QuadratureFailure(format!(
                    "non-finite integrand at r = {rm} (P = {p}, Q = {q})"
                )));
            }
            let decay = (-ds).exp();
            let gain = if ds.abs() < 1e-8 {
                1.0 - 0.5 * ds
            } else {
                -(-ds).exp_m1() / ds
            };
            let j_next = decay * j + g * h * gain;
            v += 0.5 * (j * ra + j_next * rb) * h;
            j = j_next;
            if !v.is_finite() {
                return Err(Error::QuadratureFailure(format!(
                    "integral overflowed at r = {rb}"
                )));
            }
        }
        ladder.push((anchor * 10f64.powi(k as i32 + 1), v));
    }
    let verdict = classify(&ladder);
    Ok(FellerReport { verdict, ladder })
}

fn classify(ladder: &[(f64, f64)]) -> Verdict<Explosion> {
    let values: Vec<f64> = ladder.iter().map(|&(_, v)| v).collect();
    let increments: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
    if increments.len() < LADDER_TAIL + 1 {
        return Verdict::undetermined(SOURCE, vec!["ladder too short".into()]);
    }
    let n = increments.len();
    let tail = &increments[n - LADDER_TAIL..];
    let relative: Vec<f64> = (n - LADDER_TAIL..n)
        .map(|i| increments[i] / values[i + 1])
        .collect();
    if relative.iter().all(|&r| r < CONVERGENCE_TOL) {
        return Verdict::decided(
            Explosion::Explodes,
            SOURCE,
            format!(
                "integral converges: last relative increments {}",
                fmt_list(&relative)
            ),
        );
    }
    let growing = (n - LADDER_TAIL..n).all(|i| increments[i] >= GROWTH_RATIO * increments[i - 1]);
    if growing && tail.iter().all(|&d| d > 0.0) {
        return Verdict::decided(
            Explosion::Conservative,
            SOURCE,
            format!("integral diverges: last increments {}", fmt_list(tail)),
        );
    }
    Verdict::undetermined(
        SOURCE,
        vec![format!(
            "increments neither converge nor stay bounded away from zero: {}",
            fmt_list(tail)
        )],
    )
}

fn fmt_list(values: &[f64]) -> String {
    let parts: Vec<String> = values.iter().map(|v| format!("{v:.3e}")).collect();
    format!("[{}]", parts.join(", "))
}
