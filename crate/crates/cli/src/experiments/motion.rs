use serde::{Deserialize, Serialize};
use supcrit_core::build_coefficients;
use supcrit_core::diffusion::{explosion_probability_mc, feller_explosion_test, RadialGenerator};
use supcrit_core::theory::predict_explosion;
use supcrit_core::ModelConfig;

use super::{label, num, parse_params, Agreement, Context, Job, Outcome, Strategy, SummaryRow};

pub struct Feller;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
struct FellerParams {
    anchor: f64,
    outer: f64,
    steps_per_decade: usize,
    /// Also estimate `P(τ_cap <= T)` by simulation on the cap ladder.
    mc: bool,
    caps: Vec<f64>,
    x0: f64,
    dt: f64,
    replicas: usize,
}

impl Default for FellerParams {
    fn default() -> Self {
        FellerParams {
            anchor: 1.0,
            outer: 1e12,
            steps_per_decade: 200,
            mc: false,
            caps: vec![1e1, 1e2, 1e3, 1e4],
            x0: 1.0,
            dt: 1e-3,
            replicas: 200,
        }
    }
}

impl Strategy for Feller {
    fn name(&self) -> &'static str {
        "feller"
    }

    fn about(&self) -> &'static str {
        "Feller explosion test of the motion, optionally with a Monte Carlo cap ladder"
    }

    fn prepare(&self, params: toml::Table, _: &ModelConfig) -> Result<Box<dyn Job>, String> {
        Ok(Box::new(parse_params::<FellerParams>(params)?))
    }
}

impl Job for FellerParams {
    fn run(&self, ctx: &Context) -> supcrit_core::Result<Outcome> {
        let gen = RadialGenerator::from_coefficients(&build_coefficients(ctx.config)?);
        let report = feller_explosion_test(&gen, self.anchor, self.outer, self.steps_per_decade)?;
        let mut rows: Vec<Vec<String>> = report
            .ladder
            .iter()
            .map(|&(r, v)| vec!["feller".into(), num(r), num(v), String::new()])
            .collect();
        let mut mc = None;
        let horizon = ctx.config.horizon;
        if self.mc {
            let est = explosion_probability_mc(
                &gen,
                self.x0,
                horizon,
                &self.caps,
                self.dt,
                self.replicas,
                ctx.seed,
            )?;
            for row in &est.rows {
                rows.push(vec![
                    "cap".into(),
                    num(row.cap),
                    num(row.estimate.value),
                    num(row.estimate.std_err),
                ]);
            }
            mc = Some(est.limit);
        }
        let oracle = predict_explosion(ctx.config);
        Ok(Outcome {
            header: vec!["kind", "radius", "value", "std_err"],
            rows,
            summary: vec![SummaryRow {
                label: "explosion".into(),
                config_hash: ctx.config.config_hash(),
                oracle: label(oracle.value),
                numeric: label(report.verdict.value),
                mc,
                agreement: Agreement::of(&oracle, report.verdict.value),
                note: report.verdict.note.clone(),
            }],
            failures: Vec::new(),
        })
    }
}
