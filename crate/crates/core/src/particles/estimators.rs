use std::path::Path;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::offspring::{build_offspring_law, default_rate_constant, OffspringLaw};
use super::population::{norm, step_population, Population, MAX_BRANCH_PROBABILITY};
use super::ParticleRng;
use crate::diffusion::replica_rng;
use crate::error::{Error, Result};
use crate::model::file::ParticleSettings;
use crate::model::{build_coefficients, CoefficientSet, CoefficientSpec, ModelConfig};
use crate::pde::{solve_semilinear, Boundaries, Boundary, Grid, SolveOptions};
use crate::stats::{binomial, mean, quantile, slope, Estimate};

/// Largest time step regardless of the branching rate.
const MAX_DT: f64 = 0.01;
/// Fewest steps of the count-only path; each step costs a few binomial draws.
const COUNT_STEPS: f64 = 1e4;
/// Bridge crossing is only tested within this many step deviations of the sphere.
const BRIDGE_REACH: f64 = 6.0;

/// Per-replica record of the run log.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReplicaRecord {
    pub seed: u64,
    pub replica: u64,
    pub final_mass: f64,
    /// Extinction time, or `None` when alive at the end.
    pub extinction_time: Option<f64>,
    pub end_time: f64,
    pub max_radius: f64,
    pub hit: bool,
    pub capped: bool,
}

/// Writes one CSV row per replica.
pub fn write_run_log(path: &Path, records: &[ReplicaRecord]) -> Result<()> {
    let io = |e: csv::Error| Error::MissingArtifacts(format!("{}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    w.write_record([
        "seed",
        "replica",
        "final_mass",
        "extinction_time",
        "end_time",
        "max_radius",
        "hit",
        "capped",
    ])
    .map_err(io)?;
    for r in records {
        w.write_record([
            r.seed.to_string(),
            r.replica.to_string(),
            r.final_mass.to_string(),
            r.extinction_time.map_or(String::new(), |t| t.to_string()),
            r.end_time.to_string(),
            r.max_radius.to_string(),
            r.hit.to_string(),
            r.capped.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush()
        .map_err(|e| Error::MissingArtifacts(format!("{}: {e}", path.display())))
}

/// Coefficients, offspring law and step for one estimator call.
pub struct Setup {
    pub set: CoefficientSet,
    pub law: Box<dyn OffspringLaw>,
    pub dt: f64,
    pub cap: usize,
    pub dim: usize,
}

impl Setup {
    pub fn new(config: &ModelConfig, settings: &ParticleSettings) -> Result<Self> {
        let set = build_coefficients(config)?;
        let n = settings.n as f64;
        let c = settings
            .c
            .unwrap_or_else(|| default_rate_constant(config.p, n, &config.alpha, &config.beta));
        let law = build_offspring_law(config.p, n, &config.alpha, &config.beta, c)?;
        Self::with_law(set, law, settings)
    }

    pub fn with_law(
        set: CoefficientSet,
        law: Box<dyn OffspringLaw>,
        settings: &ParticleSettings,
    ) -> Result<Self> {
        let rate = law.rate();
        let auto = if rate > 0.0 {
            (MAX_BRANCH_PROBABILITY / rate).min(MAX_DT)
        } else {
            MAX_DT
        };
        let dt = settings.dt.unwrap_or(auto);
        if !(dt > 0.0) || rate * dt > MAX_BRANCH_PROBABILITY * (1.0 + 1e-9) {
            return Err(Error::Precondition(format!(
                "dt = {dt} must be positive with rate * dt <= {MAX_BRANCH_PROBABILITY} (rate {rate})"
            )));
        }
        let dim = set.config().d as usize;
        Ok(Setup {
            set,
            law,
            dt,
            cap: settings.cap,
            dim,
        })
    }

    /// Step count and step size covering `[0, t]` exactly.
    fn steps(&self, t: f64) -> (usize, f64) {
        if t <= 0.0 {
            return (0, 0.0);
        }
        let k = (t / self.dt).ceil().max(1.0) as usize;
        (k, t / k as f64)
    }

    fn origin(&self, x0: f64) -> Vec<f64> {
        let mut p = vec![0.0; self.dim];
        p[0] = x0;
        p
    }
}

/// What a replica run stops on.
enum Stop {
    Horizon,
    Watch,
}

/// Runs one replica from `start`, stopping at `t`, extinction, or when `watch` returns true.
/// Called after every step with positions, masses and time; `true` stops the replica.
type Watch<'a> = dyn FnMut(&[f64], &[f64], f64, &mut ParticleRng) -> bool + 'a;

fn run_replica(
    setup: &Setup,
    start: &[f64],
    t: f64,
    seed: u64,
    replica: u64,
    watch: &mut Watch,
    at_step: &mut dyn FnMut(&Population),
) -> (ReplicaRecord, Stop, Population) {
    let mut rng = replica_rng(seed, replica);
    let mut pop = Population::at_point(start, 1.0, setup.law.scale());
    let (steps, dt) = setup.steps(t);
    let mut flagged = false;
    let mut capped = false;
    let mut extinct_at = None;
    for _ in 0..steps {
        if pop.is_empty() {
            break;
        }
        let mut obs = |a: &[f64], b: &[f64], v: f64, rng: &mut ParticleRng| {
            if !flagged && watch(a, b, v, rng) {
                flagged = true;
            }
        };
        if step_population(
            &mut pop,
            dt,
            &setup.set,
            &*setup.law,
            &mut rng,
            setup.cap,
            Some(&mut obs),
        )
        .is_err()
        {
            capped = true;
            break;
        }
        at_step(&pop);
        if pop.is_empty() {
            extinct_at = Some(pop.time);
        }
        if flagged {
            break;
        }
    }
    let record = ReplicaRecord {
        seed,
        replica,
        final_mass: pop.mass(),
        extinction_time: extinct_at,
        end_time: pop.time,
        max_radius: pop.max_radius,
        hit: flagged,
        capped,
    };
    (
        record,
        if flagged { Stop::Watch } else { Stop::Horizon },
        pop,
    )
}

fn no_watch(_: &[f64], _: &[f64], _: f64, _: &mut ParticleRng) -> bool {
    false
}

/// Whether a Brownian step with per-coordinate variance `var` from distance
/// `d1` to `d2` on the same side of a sphere touched it in between
/// (half-space approximation of the bridge).
fn bridge_crossed(d1: f64, d2: f64, var: f64, rng: &mut ParticleRng) -> bool {
    if d1 <= 0.0 || d2 <= 0.0 {
        return true;
    }
    let reach = BRIDGE_REACH * var.sqrt();
    if d1 > reach && d2 > reach {
        return false;
    }
    rng.random::<f64>() < (-2.0 * d1 * d2 / var).exp()
}

#[derive(Clone, Debug, Serialize)]
pub struct ExtinctionReport {
    pub estimate: Estimate,
    /// Constant coefficients let the particle count evolve on its own.
    pub count_only: bool,
    pub capped: usize,
    #[serde(skip)]
    pub records: Vec<ReplicaRecord>,
}

fn constant(spec: &CoefficientSpec) -> bool {
    matches!(spec, CoefficientSpec::Constant { .. })
}

/// Fraction of replicas started from `δ_0` (`n` particles) with no particle left at `t`.
pub fn estimate_extinction(
    config: &ModelConfig,
    settings: &ParticleSettings,
    t: f64,
    seed: u64,
) -> Result<ExtinctionReport> {
    let setup = Setup::new(config, settings)?;
    let count_only = constant(&config.alpha) && constant(&config.beta);
    let start = setup.origin(0.0);
    let records: Vec<ReplicaRecord> = (0..settings.replicas as u64)
        .into_par_iter()
        .map(|i| {
            if count_only {
                count_replica(&setup, t, seed, i)
            } else {
                run_replica(&setup, &start, t, seed, i, &mut no_watch, &mut |_| {}).0
            }
        })
        .collect();
    let capped = records.iter().filter(|r| r.capped).count();
    let done: Vec<&ReplicaRecord> = records.iter().filter(|r| !r.capped).collect();
    let extinct = done.iter().filter(|r| r.final_mass == 0.0).count();
    Ok(ExtinctionReport {
        estimate: binomial(extinct, done.len()),
        count_only,
        capped,
        records,
    })
}

/// Tau-leaping of the particle count alone; valid when branching does not depend on position.
fn count_replica(setup: &Setup, t: f64, seed: u64, replica: u64) -> ReplicaRecord {
    let mut rng = replica_rng(seed, replica);
    let law = &*setup.law;
    let n = law.scale();
    let mut count = n.round() as u64;
    let (mut steps, mut dt) = setup.steps(t);
    if t > 0.0 && (steps as f64) < COUNT_STEPS {
        steps = COUNT_STEPS as usize;
        dt = t / COUNT_STEPS;
    }
    let q = law.rate() * dt;
    let mut time = 0.0;
    let mut extinct_at = None;
    let mut capped = false;
    for _ in 0..steps {
        if count == 0 {
            break;
        }
        let events = if q > 0.0 {
            rand_distr::Binomial::new(count, q)
                .map_or(0, |b| rand_distr::Distribution::sample(&b, &mut rng))
        } else {
            0
        };
        count = count - events + law.sample_total(0.0, events, &mut rng);
        time += dt;
        if count == 0 {
            extinct_at = Some(time);
        }
        if count as usize > setup.cap {
            capped = true;
            break;
        }
    }
    ReplicaRecord {
        seed,
        replica,
        final_mass: count as f64 / n,
        extinction_time: extinct_at,
        end_time: time,
        max_radius: 0.0,
        hit: false,
        capped,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CspEstimate {
    pub estimate: Estimate,
    pub capped: usize,
    #[serde(skip)]
    pub records: Vec<ReplicaRecord>,
}

/// Fraction of replicas started from `δ_{x0}` whose particles stay inside the
/// ball of radius `m` up to time `t`. Exits between grid times are caught
/// with the Brownian-bridge crossing probability.
pub fn estimate_csp_probability(
    config: &ModelConfig,
    settings: &ParticleSettings,
    m: f64,
    t: f64,
    x0: f64,
    seed: u64,
) -> Result<CspEstimate> {
    if !(x0 >= 0.0 && x0 < m) {
        return Err(Error::Precondition(format!(
            "x0 = {x0} must lie inside the ball of radius {m}"
        )));
    }
    let setup = Setup::new(config, settings)?;
    let start = setup.origin(x0);
    let records: Vec<ReplicaRecord> = (0..settings.replicas as u64)
        .into_par_iter()
        .map(|i| {
            let mut exit = |a: &[f64], b: &[f64], var: f64, rng: &mut ParticleRng| {
                bridge_crossed(m - norm(a), m - norm(b), var, rng)
            };
            run_replica(&setup, &start, t, seed, i, &mut exit, &mut |_| {}).0
        })
        .collect();
    let capped = records.iter().filter(|r| r.capped).count();
    let inside = records.iter().filter(|r| !r.capped && !r.hit).count();
    Ok(CspEstimate {
        estimate: binomial(inside, records.len() - capped),
        capped,
        records,
    })
}

/// Behaviour of the hitting probability of `B(x, ε)` as `ε` shrinks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum HitTrend {
    BoundedAwayFromZero,
    VanishingWithEps,
}

/// Log-log slope separating the two trends.
pub const TREND_SLOPE: f64 = 0.5;

#[derive(Clone, Debug, Serialize)]
pub struct HittingEstimate {
    /// `(ε, P(hit B(target, ε) by the horizon))`.
    pub rows: Vec<(f64, Estimate)>,
    /// Least-squares slope of `ln p` against `ln ε`.
    pub slope: f64,
    pub slope_err: f64,
    /// `None` when the slope is within two standard errors of [`TREND_SLOPE`].
    pub trend: Option<HitTrend>,
    #[serde(skip)]
    pub records: Vec<ReplicaRecord>,
}

/// Fraction of replicas started from `δ_0` in which some particle enters
/// `B(target, ε)` before extinction or the config horizon, for each `ε`.
///
/// The trend is read off the decay of `p(ε)`: a slope of `ln p` against
/// `ln ε` below [`TREND_SLOPE`] counts as bounded away from zero.
pub fn estimate_hitting(
    config: &ModelConfig,
    settings: &ParticleSettings,
    target: &[f64],
    eps: &[f64],
    seed: u64,
) -> Result<HittingEstimate> {
    if config.d < 2 {
        return Err(Error::DimensionTooSmall(config.d));
    }
    if target.len() != config.d as usize {
        return Err(Error::Precondition(format!(
            "target needs {} coordinates",
            config.d
        )));
    }
    if eps.len() < 2 || eps.windows(2).any(|w| !(w[1] < w[0] && w[1] > 0.0)) {
        return Err(Error::Precondition(
            "eps ladder must be positive and decreasing".into(),
        ));
    }
    if !(norm(target) > eps[0]) {
        return Err(Error::Precondition(
            "the start point lies inside the largest target ball".into(),
        ));
    }
    let config = ModelConfig {
        domain: crate::model::DomainKind::FullSpace,
        ..config.clone()
    };
    let setup = Setup::new(&config, settings)?;
    let start = setup.origin(0.0);
    let smallest = *eps.last().unwrap();
    let runs: Vec<(ReplicaRecord, Vec<bool>)> = (0..settings.replicas as u64)
        .into_par_iter()
        .map(|i| {
            let mut hits = vec![false; eps.len()];
            let mut watch = |a: &[f64], b: &[f64], var: f64, rng: &mut ParticleRng| {
                let da = dist(a, target);
                let db = dist(b, target);
                let u: f64 = rng.random();
                for (h, &e) in hits.iter_mut().zip(eps) {
                    if !*h {
                        let (d1, d2) = (da - e, db - e);
                        let reach = BRIDGE_REACH * var.sqrt();
                        *h = d1 <= 0.0
                            || d2 <= 0.0
                            || (d1.min(d2) < reach && u < (-2.0 * d1 * d2 / var).exp());
                    }
                }
                hits[hits.len() - 1]
            };
            let (rec, _, _) = run_replica(
                &setup,
                &start,
                config.horizon,
                seed,
                i,
                &mut watch,
                &mut |_| {},
            );
            let _ = smallest;
            (rec, hits)
        })
        .collect();
    let done: Vec<&(ReplicaRecord, Vec<bool>)> = runs.iter().filter(|(r, _)| !r.capped).collect();
    let rows: Vec<(f64, Estimate)> = eps
        .iter()
        .enumerate()
        .map(|(k, &e)| {
            (
                e,
                binomial(done.iter().filter(|(_, h)| h[k]).count(), done.len()),
            )
        })
        .collect();
    let (slope, slope_err) = log_slope(&rows);
    let trend = if !slope.is_finite() {
        Some(HitTrend::VanishingWithEps)
    } else if slope + 2.0 * slope_err < TREND_SLOPE {
        Some(HitTrend::BoundedAwayFromZero)
    } else if slope - 2.0 * slope_err > TREND_SLOPE {
        Some(HitTrend::VanishingWithEps)
    } else {
        None
    };
    Ok(HittingEstimate {
        rows,
        slope,
        slope_err,
        trend,
        records: runs.into_iter().map(|(r, _)| r).collect(),
    })
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Slope of `ln p` on `ln ε` with a delta-method standard error.
fn log_slope(rows: &[(f64, Estimate)]) -> (f64, f64) {
    if rows.iter().any(|(_, e)| !(e.value > 0.0)) {
        return (f64::INFINITY, 0.0);
    }
    let x: Vec<f64> = rows.iter().map(|(e, _)| e.ln()).collect();
    let y: Vec<f64> = rows.iter().map(|(_, e)| e.value.ln()).collect();
    let s = slope(&x, &y);
    let mx = x.iter().sum::<f64>() / x.len() as f64;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    // Var(slope) = Σ ((x_i - mx)/sxx)² Var(ln p_i), Var(ln p) ≈ (se/p)².
    let var: f64 = rows
        .iter()
        .zip(&x)
        .map(|((_, e), xi)| ((xi - mx) / sxx).powi(2) * (e.std_err / e.value).powi(2))
        .sum();
    (s, var.sqrt())
}

/// Non-negative radial test function with compact support.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TestFunction {
    Zero,
    /// `height · 1{r <= radius}`.
    Indicator {
        height: f64,
        radius: f64,
    },
    /// `height · (1 - (r/radius)²)²` inside the ball.
    Bump {
        height: f64,
        radius: f64,
    },
}

impl TestFunction {
    pub fn eval(&self, r: f64) -> f64 {
        match *self {
            TestFunction::Zero => 0.0,
            TestFunction::Indicator { height, radius } => {
                if r <= radius {
                    height
                } else {
                    0.0
                }
            }
            TestFunction::Bump { height, radius } => {
                if r < radius {
                    height * (1.0 - (r / radius).powi(2)).powi(2)
                } else {
                    0.0
                }
            }
        }
    }

    fn support(&self) -> f64 {
        match *self {
            TestFunction::Zero => 0.0,
            TestFunction::Indicator { radius, .. } | TestFunction::Bump { radius, .. } => radius,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LogLaplaceRow {
    pub n: usize,
    pub estimate: Estimate,
    pub error: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct LogLaplaceReport {
    /// `exp(-u_f(x0, t))`.
    pub target: f64,
    pub rows: Vec<LogLaplaceRow>,
    /// `|error|` does not grow along the ladder beyond two standard errors.
    pub errors_shrink: bool,
    /// Last error within three standard errors plus [`LOGLAPLACE_SLACK`].
    pub final_within: bool,
}

/// Allowance for the PDE scheme and the `O(1/n)` particle bias.
pub const LOGLAPLACE_SLACK: f64 = 1e-2;

/// Compares `E exp(-<f, X_n(t)>)` started from `δ_{x0}` with `exp(-u_f(x0, t))`
/// along an increasing ladder of `n`.
pub fn loglaplace_check(
    config: &ModelConfig,
    settings: &ParticleSettings,
    f: TestFunction,
    x0: f64,
    t: f64,
    ns: &[usize],
    seed: u64,
) -> Result<LogLaplaceReport> {
    if ns.is_empty() || ns.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Precondition("n ladder must be increasing".into()));
    }
    if let TestFunction::Indicator { height, radius } | TestFunction::Bump { height, radius } = f {
        if !(height >= 0.0 && radius > 0.0 && height.is_finite() && radius.is_finite()) {
            return Err(Error::Precondition(
                "test function must be bounded, non-negative, compactly supported".into(),
            ));
        }
    }
    let target = if f == TestFunction::Zero || t == 0.0 {
        (-f.eval(x0)).exp()
    } else {
        let set = build_coefficients(config)?;
        let spread = 10.0 * (2.0 * set.a(f.support() + x0 + 1.0) * t).sqrt();
        let outer = f.support().max(x0) + spread + 1.0;
        let grid = Grid::uniform(0.0, outer, 2000);
        let bc = Boundaries {
            left: Boundary::Symmetry,
            right: Boundary::ZeroFlux,
        };
        let field = solve_semilinear(&set, &grid, &|r| f.eval(r), bc, &SolveOptions::new(t, 2000))?;
        (-field.probe(x0, t)).exp()
    };
    let mut rows = Vec::with_capacity(ns.len());
    for (k, &n) in ns.iter().enumerate() {
        let s = ParticleSettings {
            n,
            ..settings.clone()
        };
        let setup = Setup::new(config, &s)?;
        let start = setup.origin(x0);
        let values: Vec<f64> = (0..settings.replicas as u64)
            .into_par_iter()
            .map(|i| {
                let (_, _, pop) = run_replica(
                    &setup,
                    &start,
                    t,
                    seed.wrapping_add(k as u64),
                    i,
                    &mut no_watch,
                    &mut |_| {},
                );
                (-pop.integrate(|r| f.eval(r))).exp()
            })
            .collect();
        let estimate = mean(&values);
        rows.push(LogLaplaceRow {
            n,
            estimate,
            error: estimate.value - target,
        });
    }
    let errors_shrink = rows.windows(2).all(|w| {
        w[1].error.abs()
            <= w[0].error.abs() + 2.0 * w[1].estimate.std_err.max(w[0].estimate.std_err)
    });
    let last = rows.last().unwrap();
    Ok(LogLaplaceReport {
        target,
        final_within: last.error.abs() <= 3.0 * last.estimate.std_err + LOGLAPLACE_SLACK,
        errors_shrink,
        rows,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RadiusQuantiles {
    pub t: f64,
    pub q50: f64,
    pub q90: f64,
    pub q99: f64,
}

/// Quantiles of the running support radius `R_t` over replicas started from `δ_0`.
pub fn support_radius_profile(
    config: &ModelConfig,
    settings: &ParticleSettings,
    times: &[f64],
    seed: u64,
) -> Result<Vec<RadiusQuantiles>> {
    let setup = Setup::new(config, settings)?;
    radius_profile(&setup, times, settings.replicas, seed)
}

/// [`support_radius_profile`] for an explicit setup, e.g. with [`super::offspring::NoBranching`].
pub fn radius_profile(
    setup: &Setup,
    times: &[f64],
    replicas: usize,
    seed: u64,
) -> Result<Vec<RadiusQuantiles>> {
    if times.windows(2).any(|w| w[1] < w[0]) || times.iter().any(|&t| t < 0.0) {
        return Err(Error::Precondition(
            "times must be non-negative and sorted".into(),
        ));
    }
    let horizon = times.last().copied().unwrap_or(0.0);
    let start = setup.origin(0.0);
    let (_, dt) = setup.steps(horizon);
    let paths: Vec<Vec<f64>> = (0..replicas as u64)
        .into_par_iter()
        .map(|i| {
            let mut seen = Vec::with_capacity(times.len());
            let mut next = 0;
            while next < times.len() && times[next] <= 0.0 {
                seen.push(0.0);
                next += 1;
            }
            let mut last = 0.0;
            let mut record = |pop: &Population| {
                last = pop.max_radius;
                while next < times.len() && pop.time >= times[next] - 0.5 * dt {
                    seen.push(pop.max_radius);
                    next += 1;
                }
            };
            run_replica(setup, &start, horizon, seed, i, &mut no_watch, &mut record);
            seen.resize(times.len(), last);
            seen
        })
        .collect();
    Ok(times
        .iter()
        .enumerate()
        .map(|(j, &t)| {
            let mut col: Vec<f64> = paths.iter().map(|p| p[j]).collect();
            col.sort_by(f64::total_cmp);
            RadiusQuantiles {
                t,
                q50: quantile(&col, 0.5),
                q90: quantile(&col, 0.9),
                q99: quantile(&col, 0.99),
            }
        })
        .collect())
}

/// Sample mean of `<1, X_n(t)>` started from `δ_0`.
pub fn mean_total_mass(
    config: &ModelConfig,
    settings: &ParticleSettings,
    t: f64,
    seed: u64,
) -> Result<Estimate> {
    let report = estimate_extinction(config, settings, t, seed)?;
    let masses: Vec<f64> = report
        .records
        .iter()
        .filter(|r| !r.capped)
        .map(|r| r.final_mass)
        .collect();
    Ok(mean(&masses))
}
