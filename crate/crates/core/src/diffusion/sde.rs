use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::RadialGenerator;
use crate::error::{Error, Result};
use crate::stats::{binomial, Estimate};

/// Largest displacement per step relative to `max(r, 1)`.
const STEP_FRACTION: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExitFlag {
    None,
    HitOuterCap,
    HitInnerBoundary,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PathSample {
    pub times: Vec<f64>,
    pub radii: Vec<f64>,
    pub exit: ExitFlag,
    pub exit_time: Option<f64>,
}

/// Independent generator per replica, keyed by `(seed, replica)`.
pub(crate) fn replica_rng(seed: u64, replica: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replica);
    rng
}

/// Euler-Maruyama path of the motion started at radius `x0`, stopped at `T`
/// or when the radius reaches `cap`.
///
/// Isotropic generators `A(|x|) Δ` are simulated in Cartesian coordinates,
/// `dX = sqrt(2A) dW`; other generators in the radius with reflection at
/// `r_lo = 0` and absorption at a positive `r_lo`. The step shrinks near
/// large radii so that one step moves at most about a tenth of `max(r, 1)`.
pub fn simulate_path(
    gen: &RadialGenerator,
    x0: f64,
    dt: f64,
    horizon: f64,
    cap: f64,
    seed: u64,
) -> Result<PathSample> {
    let mut rng = replica_rng(seed, 0);
    simulate_with(gen, x0, dt, horizon, &[cap], &mut rng, true).map(|(p, _)| p)
}

/// Core stepping loop; returns the path (if recorded) and the first time each cap was reached.
fn simulate_with(
    gen: &RadialGenerator,
    x0: f64,
    dt: f64,
    horizon: f64,
    caps: &[f64],
    rng: &mut ChaCha8Rng,
    record: bool,
) -> Result<(PathSample, Vec<Option<f64>>)> {
    if !(dt > 0.0) {
        return Err(Error::Precondition(format!(
            "dt must be positive (got {dt})"
        )));
    }
    if !(x0 >= gen.r_lo && x0 < gen.r_hi) {
        return Err(Error::Precondition(format!(
            "start {x0} outside ({}, {})",
            gen.r_lo, gen.r_hi
        )));
    }
    gen.check_elliptic()?;
    let cap = caps.last().copied().unwrap_or(f64::INFINITY);
    let limit = cap / 10.0;
    let mut first_hits = vec![None; caps.len()];
    let mut next_cap = 0;
    let mut times = Vec::new();
    let mut radii = Vec::new();
    let mut t = 0.0;

    let iso = gen.isotropic_parts();
    let dim = iso.map_or(1, |(_, d)| d as usize);
    let mut pos = vec![0.0; dim];
    pos[0] = x0;
    let mut r = x0;
    if record {
        times.push(0.0);
        radii.push(r);
    }
    let mut exit = ExitFlag::None;

    while t < horizon {
        let (p, q) = match iso {
            Some((a, _)) => (a(r), 0.0),
            None => (gen.p(r), gen.q(r)),
        };
        let scale = STEP_FRACTION * r.abs().max(1.0);
        // Keep the noise well inside the cap/10 guard so only the drift can trip it.
        let guard = (limit / 8.0).powi(2) / (2.0 * p * dim as f64);
        let step = dt
            .min(scale * scale / (2.0 * p * dim as f64))
            .min(guard)
            .min(horizon - t);
        let sd = (2.0 * p * step).sqrt();
        let new_r = match iso {
            Some(_) => {
                for x in pos.iter_mut() {
                    let z: f64 = StandardNormal.sample(rng);
                    *x += sd * z;
                }
                pos.iter().map(|x| x * x).sum::<f64>().sqrt()
            }
            None => {
                let z: f64 = StandardNormal.sample(rng);
                let mut nr = r + q * step + sd * z;
                if gen.r_lo == 0.0 && nr < 0.0 {
                    nr = -nr;
                }
                nr
            }
        };
        if (new_r - r).abs() > limit {
            return Err(Error::StepSizeTooLarge {
                increment: (new_r - r).abs(),
                limit,
            });
        }
        r = new_r;
        t += step;
        if record {
            times.push(t);
            radii.push(r);
        }
        while next_cap < caps.len() && r >= caps[next_cap] {
            first_hits[next_cap] = Some(t);
            next_cap += 1;
        }
        if next_cap == caps.len() && !caps.is_empty() {
            exit = ExitFlag::HitOuterCap;
            break;
        }
        if gen.r_lo > 0.0 && r <= gen.r_lo || r < gen.r_lo {
            exit = ExitFlag::HitInnerBoundary;
            break;
        }
    }
    let exit_time = match exit {
        ExitFlag::None => None,
        _ => Some(t),
    };
    Ok((
        PathSample {
            times,
            radii,
            exit,
            exit_time,
        },
        first_hits,
    ))
}

#[derive(Clone, Debug, PartialEq)]
pub struct CapEstimate {
    pub cap: f64,
    pub replicas: usize,
    pub estimate: Estimate,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExplosionEstimate {
    pub rows: Vec<CapEstimate>,
    /// Whether the last two caps differ by less than one standard error.
    pub plateau: bool,
    /// Estimate at the largest cap, the extrapolated value of `P(explosion <= T)`.
    pub limit: Estimate,
}

/// Monte Carlo estimate of `P(τ_cap <= T)` on an increasing cap ladder.
/// Each replica records the first passage of every cap, so the estimates
/// are non-increasing in the cap by construction.
pub fn explosion_probability_mc(
    gen: &RadialGenerator,
    x0: f64,
    horizon: f64,
    caps: &[f64],
    dt: f64,
    replicas: usize,
    seed: u64,
) -> Result<ExplosionEstimate> {
    if caps.is_empty() || caps.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Precondition(
            "caps must be non-empty and increasing".into(),
        ));
    }
    let hits: Vec<Vec<bool>> = if horizon <= 0.0 {
        vec![vec![false; caps.len()]; replicas]
    } else {
        (0..replicas as u64)
            .into_par_iter()
            .map(|i| {
                let mut rng = replica_rng(seed, i);
                simulate_with(gen, x0, dt, horizon, caps, &mut rng, false)
                    .map(|(_, first)| first.iter().map(|t| t.is_some()).collect())
            })
            .collect::<Result<_>>()?
    };
    let rows: Vec<CapEstimate> = caps
        .iter()
        .enumerate()
        .map(|(k, &cap)| {
            let count = hits.iter().filter(|h| h[k]).count();
            CapEstimate {
                cap,
                replicas,
                estimate: binomial(count, replicas),
            }
        })
        .collect();
    let last = rows.last().unwrap().estimate;
    let plateau = rows.len() >= 2 && {
        let prev = rows[rows.len() - 2].estimate;
        prev.value == last.value || (prev.value - last.value).abs() < last.std_err.max(prev.std_err)
    };
    Ok(ExplosionEstimate {
        rows,
        plateau,
        limit: last,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_seeds_give_identical_paths() {
        let gen = RadialGenerator::radial_power(1.0, 2);
        let a = simulate_path(&gen, 0.5, 1e-3, 1.0, 1e3, 9).unwrap();
        let b = simulate_path(&gen, 0.5, 1e-3, 1.0, 1e3, 9).unwrap();
        assert_eq!(a, b);
        let c = simulate_path(&gen, 0.5, 1e-3, 1.0, 1e3, 10).unwrap();
        assert_ne!(a.radii, c.radii);
    }

    #[test]
    fn degenerate_diffusion_is_rejected() {
        let gen = RadialGenerator::new(|_| 0.0, |_| 0.0, 0.0, f64::INFINITY);
        assert!(matches!(
            simulate_path(&gen, 1.0, 1e-3, 1.0, 10.0, 0),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn oversized_step_is_reported() {
        let gen = RadialGenerator::new(|_| 1.0, |_| 1e4, 0.0, f64::INFINITY);
        assert!(matches!(
            simulate_path(&gen, 1.0, 0.1, 1.0, 100.0, 0),
            Err(Error::StepSizeTooLarge { .. })
        ));
    }

    #[test]
    fn zero_horizon_gives_zero() {
        let gen = RadialGenerator::radial_power(3.0, 3);
        let est = explosion_probability_mc(&gen, 0.0, 0.0, &[10.0, 100.0], 1e-3, 20, 1).unwrap();
        assert!(est.rows.iter().all(|r| r.estimate.value == 0.0));
    }

    #[test]
    fn inner_absorption() {
        let gen = RadialGenerator::new(|_| 1.0, |_| -5.0, 0.5, f64::INFINITY);
        let path = simulate_path(&gen, 1.0, 1e-3, 5.0, 100.0, 3).unwrap();
        assert_eq!(path.exit, ExitFlag::HitInnerBoundary);
    }
}
