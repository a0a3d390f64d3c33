use serde::{Deserialize, Serialize};
use supcrit_core::model::file::ParticleSettings;
use supcrit_core::particles::{
    estimate_csp_probability, estimate_hitting, loglaplace_check, HitTrend, TestFunction,
};
use supcrit_core::pde::{csp_probability, Discretisation};
use supcrit_core::theory::{predict_csp, predict_point_hitting, Hitting as HitVerdict};
use supcrit_core::{validate_config, ModelConfig};

use super::{label, num, parse_params, Agreement, Context, Job, Outcome, Strategy, SummaryRow};

fn particles_available(config: &ModelConfig) -> Result<(), String> {
    let report = validate_config(config);
    if report.particles_available() {
        Ok(())
    } else {
        Err(format!(
            "particle approximation unavailable: {}",
            report.flags.join("; ")
        ))
    }
}

fn settings(
    n: usize,
    replicas: usize,
    c: Option<f64>,
    dt: Option<f64>,
    cap: usize,
) -> ParticleSettings {
    ParticleSettings {
        n,
        replicas,
        c,
        dt,
        cap,
    }
}

pub struct Simulate;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
struct SimulateParams {
    n: usize,
    replicas: usize,
    c: Option<f64>,
    dt: Option<f64>,
    cap: usize,
    /// Ball radius the support must stay inside.
    ball: f64,
    x0: f64,
    /// Time horizon; the model horizon when absent.
    t: Option<f64>,
    /// Compare with `exp(-u_ball(x0, t))` from the PDE.
    pde: bool,
    nodes: usize,
    steps: usize,
}

impl Default for SimulateParams {
    fn default() -> Self {
        let p = ParticleSettings::default();
        SimulateParams {
            n: p.n,
            replicas: p.replicas,
            c: p.c,
            dt: p.dt,
            cap: p.cap,
            ball: 4.0,
            x0: 0.0,
            t: None,
            pde: true,
            nodes: 400,
            steps: 400,
        }
    }
}

impl Strategy for Simulate {
    fn name(&self) -> &'static str {
        "simulate"
    }

    fn about(&self) -> &'static str {
        "branching particle estimate of P(support stays in a ball), against the PDE"
    }

    fn prepare(&self, params: toml::Table, config: &ModelConfig) -> Result<Box<dyn Job>, String> {
        particles_available(config)?;
        Ok(Box::new(parse_params::<SimulateParams>(params)?))
    }
}

impl Job for SimulateParams {
    fn run(&self, ctx: &Context) -> supcrit_core::Result<Outcome> {
        let t = self.t.unwrap_or(ctx.config.horizon);
        let s = settings(self.n, self.replicas, self.c, self.dt, self.cap);
        let est = estimate_csp_probability(ctx.config, &s, self.ball, t, self.x0, ctx.seed)?;
        let e = est.estimate;
        let mut rows = vec![vec![
            "particles".into(),
            num(e.value),
            num(e.std_err),
            num(e.ci_lo),
            num(e.ci_hi),
        ]];
        let oracle = predict_csp(ctx.config);
        let (numeric, agreement, note) = if self.pde {
            let disc = Discretisation {
                bulk_cells: self.nodes,
                steps: self.steps,
                ..Discretisation::default()
            };
            let target = csp_probability(ctx.config, self.ball, t, self.x0, &disc)?;
            rows.push(vec![
                "pde".into(),
                num(target),
                String::new(),
                String::new(),
                String::new(),
            ]);
            let ok = e.agrees_with(target, 3.0, 1e-2) && est.capped == 0;
            let note = format!(
                "|mc - pde| = {:.4} against 3 se + 0.01 = {:.4}; capped {}",
                (e.value - target).abs(),
                3.0 * e.std_err + 1e-2,
                est.capped
            );
            (
                format!("exp(-u) = {target:.6}"),
                Agreement::from_bool(ok),
                note,
            )
        } else {
            (
                String::new(),
                Agreement::NoVerdict,
                format!("capped {}", est.capped),
            )
        };
        Ok(Outcome {
            header: vec!["source", "value", "std_err", "ci_lo", "ci_hi"],
            rows,
            summary: vec![SummaryRow {
                label: format!("P(support in B({}) up to t = {t})", self.ball),
                config_hash: ctx.config.config_hash(),
                oracle: label(oracle.value),
                numeric,
                mc: Some(e),
                agreement,
                note,
            }],
            failures: Vec::new(),
        })
    }
}

pub struct Hitting;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
struct HittingParams {
    n: usize,
    replicas: usize,
    c: Option<f64>,
    dt: Option<f64>,
    cap: usize,
    /// Target point; `(1, 0, ..., 0)` when absent.
    target: Option<Vec<f64>>,
    eps: Vec<f64>,
}

impl Default for HittingParams {
    fn default() -> Self {
        HittingParams {
            n: 200,
            replicas: 400,
            c: None,
            dt: None,
            cap: ParticleSettings::default().cap,
            target: None,
            eps: vec![0.2, 0.1, 0.05],
        }
    }
}

impl Strategy for Hitting {
    fn name(&self) -> &'static str {
        "hitting"
    }

    fn about(&self) -> &'static str {
        "particle estimate of the probability of charging small balls around a point"
    }

    fn prepare(&self, params: toml::Table, config: &ModelConfig) -> Result<Box<dyn Job>, String> {
        particles_available(config)?;
        if config.d < 2 {
            return Err(format!("point hitting needs d >= 2 (got {})", config.d));
        }
        let p: HittingParams = parse_params(params)?;
        if p.target
            .as_ref()
            .is_some_and(|t| t.len() != config.d as usize)
        {
            return Err(format!("target needs {} coordinates", config.d));
        }
        Ok(Box::new(p))
    }
}

impl Job for HittingParams {
    fn run(&self, ctx: &Context) -> supcrit_core::Result<Outcome> {
        let d = ctx.config.d as usize;
        let target = self.target.clone().unwrap_or_else(|| {
            let mut x = vec![0.0; d];
            x[0] = 1.0;
            x
        });
        let s = settings(self.n, self.replicas, self.c, self.dt, self.cap);
        let est = estimate_hitting(ctx.config, &s, &target, &self.eps, ctx.seed)?;
        let numeric = est.trend.map(|t| match t {
            HitTrend::BoundedAwayFromZero => HitVerdict::Hits,
            HitTrend::VanishingWithEps => HitVerdict::Never,
        });
        let oracle = predict_point_hitting(ctx.config)?;
        Ok(Outcome {
            header: vec!["eps", "value", "std_err", "ci_lo", "ci_hi"],
            rows: est
                .rows
                .iter()
                .map(|(e, x)| {
                    vec![
                        num(*e),
                        num(x.value),
                        num(x.std_err),
                        num(x.ci_lo),
                        num(x.ci_hi),
                    ]
                })
                .collect(),
            summary: vec![SummaryRow {
                label: "point hitting".into(),
                config_hash: ctx.config.config_hash(),
                oracle: label(oracle.value),
                numeric: label(numeric),
                mc: est.rows.last().map(|r| r.1),
                agreement: Agreement::of(&oracle, numeric),
                note: format!("log-log slope {:.3} ± {:.3}", est.slope, est.slope_err),
            }],
            failures: Vec::new(),
        })
    }
}

pub struct LogLaplace;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
struct LogLaplaceParams {
    f: TestFunction,
    x0: f64,
    t: Option<f64>,
    ns: Vec<usize>,
    replicas: usize,
    c: Option<f64>,
    dt: Option<f64>,
    cap: usize,
}

impl Default for LogLaplaceParams {
    fn default() -> Self {
        LogLaplaceParams {
            f: TestFunction::Bump {
                height: 2.0,
                radius: 1.5,
            },
            x0: 0.0,
            t: None,
            ns: vec![50, 200],
            replicas: 400,
            c: None,
            dt: None,
            cap: ParticleSettings::default().cap,
        }
    }
}

impl Strategy for LogLaplace {
    fn name(&self) -> &'static str {
        "loglaplace"
    }

    fn about(&self) -> &'static str {
        "Laplace functional of the particle system against exp(-u_f) from the PDE"
    }

    fn prepare(&self, params: toml::Table, config: &ModelConfig) -> Result<Box<dyn Job>, String> {
        particles_available(config)?;
        let p: LogLaplaceParams = parse_params(params)?;
        if p.ns.is_empty() {
            return Err("ns must be non-empty".into());
        }
        Ok(Box::new(p))
    }
}

impl Job for LogLaplaceParams {
    fn run(&self, ctx: &Context) -> supcrit_core::Result<Outcome> {
        let t = self.t.unwrap_or(ctx.config.horizon);
        let s = settings(self.ns[0], self.replicas, self.c, self.dt, self.cap);
        let rep = loglaplace_check(ctx.config, &s, self.f, self.x0, t, &self.ns, ctx.seed)?;
        Ok(Outcome {
            header: vec!["n", "value", "std_err", "error"],
            rows: rep
                .rows
                .iter()
                .map(|r| {
                    vec![
                        r.n.to_string(),
                        num(r.estimate.value),
                        num(r.estimate.std_err),
                        num(r.error),
                    ]
                })
                .collect(),
            summary: vec![SummaryRow {
                label: "Laplace functional".into(),
                config_hash: ctx.config.config_hash(),
                oracle: String::new(),
                numeric: format!("exp(-u_f) = {:.6}", rep.target),
                mc: rep.rows.last().map(|r| r.estimate),
                agreement: Agreement::from_bool(rep.final_within),
                note: format!(
                    "errors shrink {}; last within tolerance {}",
                    rep.errors_shrink, rep.final_within
                ),
            }],
            failures: Vec::new(),
        })
    }
}
