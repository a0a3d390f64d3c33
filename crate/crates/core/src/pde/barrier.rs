use std::fmt;

use super::grid::Grid;
use crate::error::{Error, Result};
use crate::model::{build_coefficients, CoefficientSpec, ModelConfig};

/// Log-value and log-derivatives of a barrier at one point. Spatial
/// derivatives are multiplied by powers of the local length `sigma` so that
/// they stay finite next to the singular ends.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BarrierPoint {
    pub sigma: f64,
    pub ln_value: f64,
    /// `σ ψ_r / ψ`
    pub d1: f64,
    /// `σ² ψ_rr / ψ`
    pub d2: f64,
    /// `ψ_t / ψ`
    pub dt: f64,
}

/// A closed-form supersolution candidate on an interval of radii.
pub trait Barrier: Send + Sync + fmt::Debug {
    fn name(&self) -> &'static str;
    fn parameters(&self) -> Vec<(&'static str, f64)>;
    /// Interval on which the barrier is finite.
    fn support(&self) -> (f64, f64);
    fn eval(&self, r: f64, t: f64) -> BarrierPoint;
}

/// `(1 + r)^a (R - r)^{-a} exp(K (t + 1))`, `a = 2/(p-1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MrkBarrier {
    pub p: f64,
    pub radius: f64,
    pub k: f64,
}

impl Barrier for MrkBarrier {
    fn name(&self) -> &'static str {
        "M_RK"
    }

    fn parameters(&self) -> Vec<(&'static str, f64)> {
        vec![("R", self.radius), ("K", self.k)]
    }

    fn support(&self) -> (f64, f64) {
        (0.0, self.radius)
    }

    fn eval(&self, r: f64, t: f64) -> BarrierPoint {
        let a = 2.0 / (self.p - 1.0);
        let gap = self.radius - r;
        let sigma = gap.min(1.0);
        let (x, y) = (sigma / (1.0 + r), sigma / gap);
        let d1 = a * x + a * y;
        BarrierPoint {
            sigma,
            ln_value: a * r.ln_1p() - a * gap.ln() + self.k * (t + 1.0),
            d1,
            d2: -a * x * x + a * y * y + d1 * d1,
            dt: self.k,
        }
    }
}

/// `((r - ε)(R - r))^{-a} (1 + r)^a (1 + ε^l r^{-l} R^a) exp(γ (t + 1))`, `a = 2/(p-1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PsiBarrier {
    pub p: f64,
    pub radius: f64,
    pub eps: f64,
    pub l: f64,
    pub gamma: f64,
}

impl Barrier for PsiBarrier {
    fn name(&self) -> &'static str {
        "Psi_Reps"
    }

    fn parameters(&self) -> Vec<(&'static str, f64)> {
        vec![
            ("R", self.radius),
            ("eps", self.eps),
            ("l", self.l),
            ("gamma", self.gamma),
        ]
    }

    fn support(&self) -> (f64, f64) {
        (self.eps, self.radius)
    }

    fn eval(&self, r: f64, t: f64) -> BarrierPoint {
        let (a, l) = (2.0 / (self.p - 1.0), self.l);
        let (inner, outer) = (r - self.eps, self.radius - r);
        let sigma = inner.min(outer).min(1.0);
        let ln_q = l * (self.eps.ln() - r.ln()) + a * self.radius.ln();
        // s = q / (1 + q) and ln(1 + q), both without overflow.
        let s = 1.0 / (1.0 + (-ln_q).exp());
        let ln_1q = if ln_q > 0.0 {
            ln_q + (-ln_q).exp().ln_1p()
        } else {
            ln_q.exp().ln_1p()
        };
        let (xi, xo, x1, xr) = (sigma / inner, sigma / outer, sigma / (1.0 + r), sigma / r);
        let d1 = -a * xi + a * xo + a * x1 - l * s * xr;
        let dg =
            a * xi * xi + a * xo * xo - a * x1 * x1 + (l * (l + 1.0) * s - l * l * s * s) * xr * xr;
        BarrierPoint {
            sigma,
            ln_value: -a * inner.ln() - a * outer.ln()
                + a * r.ln_1p()
                + ln_1q
                + self.gamma * (t + 1.0),
            d1,
            d2: dg + d1 * d1,
            dt: self.gamma,
        }
    }
}

/// `σ² c(r)` for a coefficient, exact for inverse-square laws at tiny radii.
fn scaled_coefficient(spec: &CoefficientSpec, r: f64, sigma: f64) -> f64 {
    match *spec {
        CoefficientSpec::InverseSquare { k } => k * (sigma / r) * (sigma / r),
        _ => spec.eval(r) * sigma * sigma,
    }
}

/// `σ² c(r) exp(ln_w)`, combined in log space so that tiny `σ` and huge `w` do not meet as `0 * inf`.
fn scaled_power(spec: &CoefficientSpec, r: f64, sigma: f64, ln_w: f64) -> f64 {
    match *spec {
        CoefficientSpec::InverseSquare { k } => k * (2.0 * (sigma / r).ln() + ln_w).exp(),
        _ => spec.eval(r) * (2.0 * sigma.ln() + ln_w).exp(),
    }
}

/// Nodes inside the support of `barrier`, clustered geometrically toward both
/// ends. `clearance` is the relative distance kept from each end; `origin`
/// the smallest radius used when the support starts at zero.
pub fn barrier_grid(barrier: &dyn Barrier, clearance: f64, origin: f64, points: usize) -> Grid {
    let (lo, hi) = barrier.support();
    let n = points.max(16) / 4;
    let logspace = |a: f64, b: f64, k: usize| -> Vec<f64> {
        (0..k)
            .map(|i| (a.ln() + (b.ln() - a.ln()) * i as f64 / (k - 1) as f64).exp())
            .collect()
    };
    let mut nodes = Vec::with_capacity(4 * n);
    let start = if lo > 0.0 { lo } else { origin };
    if lo > 0.0 {
        nodes.extend(logspace(clearance, 1.0, n).into_iter().map(|s| lo + lo * s));
    }
    nodes.extend(logspace(start.max(lo * 2.0), 0.5 * hi, 2 * n));
    nodes.extend(logspace(clearance, 0.5, n).into_iter().map(|s| hi - hi * s));
    nodes.retain(|&r| r >= start && r > lo && r < hi);
    nodes.sort_by(|a, b| a.partial_cmp(b).unwrap());
    nodes.dedup();
    Grid { nodes }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BarrierCheck {
    /// Largest value of `σ² (L ψ + β ψ - α ψ^p - ψ_t) / ψ`; the barrier is a supersolution iff `<= 0`.
    pub max: f64,
    pub at_r: f64,
    pub at_t: f64,
}

/// Evaluates the parabolic operator of `config` on the barrier over the grid
/// and `times` sample points of the window.
pub fn verify_barrier(
    barrier: &dyn Barrier,
    config: &ModelConfig,
    grid: &Grid,
    window: (f64, f64),
    times: usize,
) -> Result<BarrierCheck> {
    let set = build_coefficients(config)?;
    let dm1 = set.dim() - 1.0;
    let p = config.p;
    let ts: Vec<f64> = if times <= 1 {
        vec![window.0]
    } else {
        (0..times)
            .map(|k| window.0 + (window.1 - window.0) * k as f64 / (times - 1) as f64)
            .collect()
    };
    let mut check = BarrierCheck {
        max: f64::NEG_INFINITY,
        at_r: f64::NAN,
        at_t: f64::NAN,
    };
    for &t in &ts {
        for &r in &grid.nodes {
            let pt = barrier.eval(r, t);
            let s = pt.sigma;
            let transport = set.a(r) * (pt.d2 + dm1 * (s / r) * pt.d1);
            let absorption = scaled_power(&config.alpha, r, s, (p - 1.0) * pt.ln_value);
            let value =
                transport + scaled_coefficient(&config.beta, r, s) - absorption - s * s * pt.dt;
            let value = if value.is_nan() { f64::INFINITY } else { value };
            if value > check.max {
                check = BarrierCheck {
                    max: value,
                    at_r: r,
                    at_t: t,
                };
            }
        }
    }
    Ok(check)
}

#[derive(Clone, Debug, PartialEq)]
pub struct BarrierSearch {
    pub name: &'static str,
    pub parameters: Vec<(&'static str, f64)>,
    /// Worst value over every radius (and ε) checked with these parameters.
    pub max: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchSettings {
    pub clearance: f64,
    pub origin: f64,
    pub points: usize,
    pub times: usize,
}

impl Default for SearchSettings {
    fn default() -> Self {
        SearchSettings {
            clearance: 1e-3,
            origin: 0.1,
            points: 400,
            times: 5,
        }
    }
}

fn worst(
    barriers: impl Iterator<Item = Box<dyn Barrier>>,
    config: &ModelConfig,
    settings: &SearchSettings,
) -> Result<f64> {
    let mut max = f64::NEG_INFINITY;
    for b in barriers {
        let grid = barrier_grid(
            b.as_ref(),
            settings.clearance,
            settings.origin,
            settings.points,
        );
        max = max.max(
            verify_barrier(
                b.as_ref(),
                config,
                &grid,
                (0.0, config.horizon),
                settings.times,
            )?
            .max,
        );
    }
    Ok(max)
}

/// Doubles `K` from 1 to 1024 until `M_RK` is a supersolution for every radius in `radii`.
pub fn search_mrk(
    config: &ModelConfig,
    radii: &[f64],
    settings: &SearchSettings,
) -> Result<BarrierSearch> {
    let mut best = f64::INFINITY;
    for j in 0..=10 {
        let k = 2f64.powi(j);
        let barriers = radii.iter().map(|&radius| {
            Box::new(MrkBarrier {
                p: config.p,
                radius,
                k,
            }) as Box<dyn Barrier>
        });
        let max = worst(barriers, config, settings)?;
        if max <= 0.0 {
            return Ok(BarrierSearch {
                name: "M_RK",
                parameters: vec![("K", k)],
                max,
            });
        }
        best = best.min(max);
    }
    Err(Error::NoValidParameters { best })
}

/// Halves `l` from 1 to 1/16 and doubles `γ` from 1 to 32 until `ψ` is a
/// supersolution for every pair in `radii × eps`.
pub fn search_psi(
    config: &ModelConfig,
    radii: &[f64],
    eps: &[f64],
    settings: &SearchSettings,
) -> Result<BarrierSearch> {
    let mut best = f64::INFINITY;
    for i in 0..=4 {
        let l = 0.5f64.powi(i);
        for j in 0..=5 {
            let gamma = 2f64.powi(j);
            let barriers = radii.iter().flat_map(|&radius| {
                eps.iter().map(move |&e| {
                    Box::new(PsiBarrier {
                        p: config.p,
                        radius,
                        eps: e,
                        l,
                        gamma,
                    }) as Box<dyn Barrier>
                })
            });
            let max = worst(barriers, config, settings)?;
            if max <= 0.0 {
                return Ok(BarrierSearch {
                    name: "Psi_Reps",
                    parameters: vec![("l", l), ("gamma", gamma)],
                    max,
                });
            }
            best = best.min(max);
        }
    }
    Err(Error::NoValidParameters { best })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Central differences of `ln ψ` against the analytic log-derivatives.
    fn check_derivatives(b: &dyn Barrier, r: f64) {
        let h = 1e-5 * r;
        let f = |x: f64| b.eval(x, 0.3).ln_value;
        let pt = b.eval(r, 0.3);
        let g = (f(r + h) - f(r - h)) / (2.0 * h);
        let g2 = (f(r + h) - 2.0 * f(r) + f(r - h)) / (h * h);
        let s = pt.sigma;
        assert!(
            (pt.d1 - s * g).abs() < 1e-5 * (1.0 + pt.d1.abs()),
            "{} d1 at {r}",
            b.name()
        );
        let d2 = s * s * (g2 + g * g);
        assert!(
            (pt.d2 - d2).abs() < 1e-3 * (1.0 + pt.d2.abs()),
            "{} d2 at {r}: {} vs {d2}",
            b.name(),
            pt.d2
        );
        let dt = (b.eval(r, 0.3 + 1e-6).ln_value - b.eval(r, 0.3 - 1e-6).ln_value) / 2e-6;
        assert!((pt.dt - dt).abs() < 1e-6 * dt.abs().max(1.0));
    }

    #[test]
    fn analytic_derivatives() {
        let m = MrkBarrier {
            p: 2.0,
            radius: 10.0,
            k: 3.0,
        };
        for r in [0.2, 1.0, 5.0, 9.5] {
            check_derivatives(&m, r);
        }
        let psi = PsiBarrier {
            p: 1.5,
            radius: 50.0,
            eps: 0.01,
            l: 0.5,
            gamma: 2.0,
        };
        for r in [0.0101, 0.02, 0.3, 4.0, 49.0] {
            check_derivatives(&psi, r);
        }
    }

    #[test]
    fn grid_stays_inside_support() {
        let psi = PsiBarrier {
            p: 2.0,
            radius: 1e8,
            eps: 1e-250,
            l: 1.0,
            gamma: 1.0,
        };
        let g = barrier_grid(&psi, 1e-3, 0.1, 200);
        assert!(g.lo() > 1e-250 && g.hi() < 1e8);
        let pt = psi.eval(g.lo(), 0.0);
        assert!(pt.d1.is_finite() && pt.d2.is_finite() && pt.ln_value.is_finite());
    }
}
