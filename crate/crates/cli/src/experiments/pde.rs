use serde::{Deserialize, Serialize};
use supcrit_core::model::file::PdeSettings;
use supcrit_core::pde::{
    punctured_classify, search_mrk, search_psi, umax_classify, Discretisation, SearchSettings,
};
use supcrit_core::theory::{predict_csp, Csp, Hitting};
use supcrit_core::{CoefficientSpec, DomainKind, Error, ModelConfig, MotionSpec, Verdict};

use super::{
    label, num, parse_params, Agreement, Context, Job, Outcome, Strategy, SummaryRow, FAILED,
};

fn disc(nodes: usize, steps: usize) -> Discretisation {
    Discretisation {
        bulk_cells: nodes,
        steps,
        ..Discretisation::default()
    }
}

fn punctured(config: &ModelConfig) -> bool {
    config.domain == DomainKind::Punctured
        || matches!(config.motion, MotionSpec::PuncturedLine { .. })
}

pub struct ClassifyPde;

struct ClassifyJob(PdeSettings);

impl Strategy for ClassifyPde {
    fn name(&self) -> &'static str {
        "classify-pde"
    }

    fn about(&self) -> &'static str {
        "maximal-solution ladder on balls, or the annulus ladder for punctured problems"
    }

    fn prepare(&self, params: toml::Table, _: &ModelConfig) -> Result<Box<dyn Job>, String> {
        Ok(Box::new(ClassifyJob(parse_params(params)?)))
    }
}

impl Job for ClassifyJob {
    fn run(&self, ctx: &Context) -> supcrit_core::Result<Outcome> {
        let s = &self.0;
        let cfg = ctx.config;
        let hash = cfg.config_hash();
        let oracle = predict_csp(cfg);
        if punctured(cfg) {
            // The default probe radius 0 is not inside an annulus.
            let r0 = if s.probe_r > 0.0 { s.probe_r } else { 1.0 };
            let rep = punctured_classify(
                cfg,
                &s.inner_radii,
                &s.outer_radii,
                (r0, s.probe_t),
                &disc(s.nodes, s.steps),
            )?;
            let oracle = hitting_verdict(&oracle);
            return Ok(Outcome {
                header: vec!["eps", "outer", "probe_u"],
                rows: rep
                    .table
                    .iter()
                    .map(|&(e, r, u)| vec![num(e), num(r), num(u)])
                    .collect(),
                summary: vec![SummaryRow {
                    label: "point hitting".into(),
                    config_hash: hash,
                    oracle: label(oracle.value),
                    numeric: label(rep.verdict.value),
                    mc: None,
                    agreement: Agreement::of(&oracle, rep.verdict.value),
                    note: rep.verdict.note.clone(),
                }],
                failures: Vec::new(),
            });
        }
        let rep = umax_classify(
            cfg,
            &s.radii,
            (s.probe_r, s.probe_t),
            &disc(s.nodes, s.steps),
        )?;
        Ok(Outcome {
            header: vec!["ball_radius", "probe_u"],
            rows: rep
                .sequence
                .iter()
                .map(|&(m, u)| vec![num(m), num(u)])
                .collect(),
            summary: vec![SummaryRow {
                label: "compact support".into(),
                config_hash: hash,
                oracle: label(oracle.value),
                numeric: label(rep.verdict.value),
                mc: None,
                agreement: Agreement::of(&oracle, rep.verdict.value),
                note: format!("{}; monotone {}", rep.verdict.note, rep.monotone),
            }],
            failures: Vec::new(),
        })
    }
}

/// A punctured configuration has compact support exactly when the point is never hit.
fn hitting_verdict(v: &Verdict<Csp>) -> Verdict<Hitting> {
    Verdict {
        value: v.value.map(Hitting::from_punctured),
        source: v.source.clone(),
        note: v.note.clone(),
        unmet: v.unmet.clone(),
    }
}

pub struct BarrierSearch;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum BarrierKind {
    Mrk,
    Psi,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
struct BarrierParams {
    kind: BarrierKind,
    radii: Vec<f64>,
    /// Inner radii, `psi` only.
    eps: Vec<f64>,
    clearance: f64,
    origin: f64,
    points: usize,
    times: usize,
}

impl Default for BarrierParams {
    fn default() -> Self {
        let s = SearchSettings::default();
        BarrierParams {
            kind: BarrierKind::Mrk,
            radii: vec![10.0, 100.0, 1000.0],
            eps: vec![1e-2, 1e-8, 1e-30],
            clearance: s.clearance,
            origin: s.origin,
            points: s.points,
            times: s.times,
        }
    }
}

impl Strategy for BarrierSearch {
    fn name(&self) -> &'static str {
        "barrier"
    }

    fn about(&self) -> &'static str {
        "search for an explicit supersolution barrier (M_RK on balls, psi on annuli)"
    }

    fn prepare(&self, params: toml::Table, _: &ModelConfig) -> Result<Box<dyn Job>, String> {
        let p: BarrierParams = parse_params(params)?;
        if p.radii.is_empty() || (matches!(p.kind, BarrierKind::Psi) && p.eps.is_empty()) {
            return Err("radii (and eps for psi) must be non-empty".into());
        }
        Ok(Box::new(p))
    }
}

impl Job for BarrierParams {
    fn run(&self, ctx: &Context) -> supcrit_core::Result<Outcome> {
        let settings = SearchSettings {
            clearance: self.clearance,
            origin: self.origin,
            points: self.points,
            times: self.times,
        };
        let found = match self.kind {
            BarrierKind::Mrk => search_mrk(ctx.config, &self.radii, &settings),
            BarrierKind::Psi => search_psi(ctx.config, &self.radii, &self.eps, &settings),
        };
        let oracle = predict_csp(ctx.config);
        let (rows, numeric, verdict, note) = match found {
            Ok(b) => {
                let params: Vec<String> = b
                    .parameters
                    .iter()
                    .map(|(k, v)| format!("{k}={v}"))
                    .collect();
                let rows = vec![vec![
                    b.name.to_string(),
                    params.join(" "),
                    num(b.max),
                    "found".into(),
                ]];
                (
                    rows,
                    format!("{} found", b.name),
                    Some(Csp::Holds),
                    format!("{} with worst residual {:.3e}", params.join(" "), b.max),
                )
            }
            Err(Error::NoValidParameters { best }) => {
                let rows = vec![vec![
                    self.kind_name().into(),
                    String::new(),
                    num(best),
                    "none".into(),
                ]];
                (
                    rows,
                    "no barrier".into(),
                    None,
                    format!("best residual {best:.3e}; a missing barrier decides nothing"),
                )
            }
            Err(e) => return Err(e),
        };
        Ok(Outcome {
            header: vec!["barrier", "parameters", "max_residual", "status"],
            rows,
            summary: vec![SummaryRow {
                label: "compact support".into(),
                config_hash: ctx.config.config_hash(),
                oracle: label(oracle.value),
                numeric,
                mc: None,
                agreement: Agreement::of(&oracle, verdict),
                note,
            }],
            failures: Vec::new(),
        })
    }
}

impl BarrierParams {
    fn kind_name(&self) -> &'static str {
        match self.kind {
            BarrierKind::Mrk => "M_RK",
            BarrierKind::Psi => "Psi_Reps",
        }
    }
}

pub struct Sweep;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
struct SweepParams {
    /// Motion exponents `A(r) = (1 + r)^m`.
    m: Vec<f64>,
    /// When set, `α = c1 exp(-c2 r^(offset - m))` with `c1`, `c2` from a
    /// stretched-exponential base `α` (else 1).
    alpha_decay_offset: Option<f64>,
    radii: Vec<f64>,
    probe_r: f64,
    probe_t: f64,
    nodes: usize,
    steps: usize,
}

impl Default for SweepParams {
    fn default() -> Self {
        let s = PdeSettings::default();
        SweepParams {
            m: vec![0.0, 1.0, 2.0],
            alpha_decay_offset: None,
            radii: s.radii,
            probe_r: s.probe_r,
            probe_t: s.probe_t,
            nodes: s.nodes,
            steps: s.steps,
        }
    }
}

impl SweepParams {
    fn config(&self, base: &ModelConfig, m: f64) -> ModelConfig {
        let mut cfg = ModelConfig {
            motion: MotionSpec::radial_power(m),
            ..base.clone()
        };
        if let Some(offset) = self.alpha_decay_offset {
            let (c1, c2) = match base.alpha {
                CoefficientSpec::StretchedExp { c1, c2, .. } => (c1, c2),
                _ => (1.0, 1.0),
            };
            let s = offset - m;
            cfg.alpha = if s == 0.0 {
                CoefficientSpec::constant(c1 * (-c2).exp())
            } else {
                CoefficientSpec::stretched_exp(c1, c2, s)
            };
        }
        cfg
    }
}

impl Strategy for Sweep {
    fn name(&self) -> &'static str {
        "sweep"
    }

    fn about(&self) -> &'static str {
        "maximal-solution classifier over a list of motion exponents"
    }

    fn prepare(&self, params: toml::Table, config: &ModelConfig) -> Result<Box<dyn Job>, String> {
        let p: SweepParams = parse_params(params)?;
        if p.m.is_empty() {
            return Err("m must be non-empty".into());
        }
        for &m in &p.m {
            let report = supcrit_core::validate_config(&p.config(config, m));
            if let Some(v) = report.violations.first() {
                return Err(format!("m = {m}: {}: {}", v.field, v.message));
            }
        }
        Ok(Box::new(p))
    }
}

impl Job for SweepParams {
    fn run(&self, ctx: &Context) -> supcrit_core::Result<Outcome> {
        let mut out = Outcome {
            header: vec!["m", "config_hash", "ball_radius", "probe_u"],
            ..Outcome::default()
        };
        for &m in &self.m {
            let cfg = self.config(ctx.config, m);
            let hash = cfg.config_hash();
            let oracle = predict_csp(&cfg);
            let row_label = format!("m={m}");
            match umax_classify(
                &cfg,
                &self.radii,
                (self.probe_r, self.probe_t),
                &disc(self.nodes, self.steps),
            ) {
                Ok(rep) => {
                    for &(r, u) in &rep.sequence {
                        out.rows.push(vec![num(m), hash.clone(), num(r), num(u)]);
                    }
                    out.summary.push(SummaryRow {
                        label: row_label,
                        config_hash: hash,
                        oracle: label(oracle.value),
                        numeric: label(rep.verdict.value),
                        mc: None,
                        agreement: Agreement::of(&oracle, rep.verdict.value),
                        note: format!("{}; monotone {}", rep.verdict.note, rep.monotone),
                    });
                }
                Err(e) => {
                    out.failures.push(format!("m = {m}: {e}"));
                    out.summary.push(SummaryRow {
                        label: row_label,
                        config_hash: hash,
                        oracle: label(oracle.value),
                        numeric: FAILED.into(),
                        mc: None,
                        agreement: Agreement::NoVerdict,
                        note: e.to_string(),
                    });
                }
            }
        }
        Ok(out)
    }
}
