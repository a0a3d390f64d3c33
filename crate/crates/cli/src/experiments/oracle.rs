use serde::{Deserialize, Serialize};
use supcrit_core::theory::{predict_csp, Csp};
use supcrit_core::{CoefficientSpec as C, ModelConfig, MotionSpec};

use super::{label, parse_params, Agreement, Context, Job, Outcome, Strategy, SummaryRow};

/// Twelve configurations whose verdicts follow directly from the
/// classification hypotheses, with the expected verdict.
pub fn builtin_matrix() -> Vec<(&'static str, ModelConfig, Csp)> {
    let radial = ModelConfig::radial;
    vec![
        (
            "brownian, constant alpha",
            radial(3, 2.0, 0.0, C::constant(1.0), C::constant(0.0)),
            Csp::Holds,
        ),
        (
            "linear motion, positive beta",
            radial(3, 2.0, 1.0, C::constant(1.0), C::constant(1.0)),
            Csp::Holds,
        ),
        (
            "quadratic motion, p = 1.5",
            radial(2, 1.5, 2.0, C::constant(1.0), C::constant(0.0)),
            Csp::Holds,
        ),
        (
            "alpha decays slower than r^2",
            radial(
                3,
                2.0,
                0.0,
                C::stretched_exp(1.0, 1.0, 1.5),
                C::constant(0.0),
            ),
            Csp::Holds,
        ),
        (
            "alpha decays faster than r^(2-m)",
            radial(
                3,
                2.0,
                1.0,
                C::stretched_exp(1.0, 1.0, 2.0),
                C::constant(0.0),
            ),
            Csp::Fails,
        ),
        (
            "cubic motion",
            radial(3, 2.0, 3.0, C::constant(1.0), C::constant(0.0)),
            Csp::Fails,
        ),
        (
            "line, m > 1 + p",
            radial(1, 2.0, 4.0, C::constant(1.0), C::constant(0.0)),
            Csp::Fails,
        ),
        (
            "line, m <= 1 + p, negative beta",
            radial(1, 1.5, 2.0, C::constant(1.0), C::constant(-1.0)),
            Csp::Holds,
        ),
        (
            "punctured, d below critical",
            ModelConfig::punctured_brownian(3, 2.0, C::constant(0.0)),
            Csp::Fails,
        ),
        (
            "punctured, d above critical",
            ModelConfig::punctured_brownian(5, 2.0, C::constant(0.0)),
            Csp::Holds,
        ),
        (
            "punctured, strong inverse square",
            ModelConfig::punctured_brownian(3, 2.0, C::inverse_square(-2.0)),
            Csp::Holds,
        ),
        (
            "punctured, weak inverse square",
            ModelConfig::punctured_brownian(3, 2.0, C::inverse_square(-0.5)),
            Csp::Fails,
        ),
    ]
}

pub struct Oracle;

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default)]
struct OracleParams {
    /// `"builtin"` runs the twelve-config matrix instead of the plan model.
    matrix: Option<String>,
    /// Expected verdict for the plan model, `"Holds"` or `"Fails"`.
    expect: Option<String>,
}

impl Strategy for Oracle {
    fn name(&self) -> &'static str {
        "oracle"
    }

    fn about(&self) -> &'static str {
        "theory verdicts for the plan model or the built-in matrix"
    }

    fn prepare(&self, params: toml::Table, _: &ModelConfig) -> Result<Box<dyn Job>, String> {
        let p: OracleParams = parse_params(params)?;
        if let Some(e) = &p.expect {
            parse_csp(e)?;
        }
        match p.matrix.as_deref() {
            None | Some("builtin") => Ok(Box::new(p)),
            Some(other) => Err(format!("unknown matrix {other:?} (only \"builtin\")")),
        }
    }
}

fn parse_csp(s: &str) -> Result<Csp, String> {
    match s {
        "Holds" => Ok(Csp::Holds),
        "Fails" => Ok(Csp::Fails),
        _ => Err(format!("expect must be \"Holds\" or \"Fails\" (got {s:?})")),
    }
}

fn motion_label(m: &MotionSpec) -> String {
    match m {
        MotionSpec::RadialPower { m, lead, .. } => format!("{lead}(1+r)^{m}"),
        MotionSpec::Table { .. } => "table".into(),
        MotionSpec::PuncturedLine { dim } => format!("line chart of dimension {dim}"),
    }
}

impl Job for OracleParams {
    fn run(&self, ctx: &Context) -> supcrit_core::Result<Outcome> {
        let cases: Vec<(String, ModelConfig, Option<Csp>)> = if self.matrix.is_some() {
            builtin_matrix()
                .into_iter()
                .map(|(l, c, want)| (l.to_string(), c, Some(want)))
                .collect()
        } else {
            vec![(
                ctx.name.to_string(),
                ctx.config.clone(),
                self.expect.as_deref().and_then(|e| parse_csp(e).ok()),
            )]
        };
        let mut out = Outcome {
            header: vec![
                "label",
                "config_hash",
                "d",
                "p",
                "motion",
                "alpha",
                "beta",
                "domain",
                "verdict",
                "source",
                "note",
            ],
            ..Outcome::default()
        };
        for (name, cfg, want) in cases {
            let hash = cfg.config_hash();
            let v = predict_csp(&cfg);
            out.rows.push(vec![
                name.clone(),
                hash.clone(),
                cfg.d.to_string(),
                cfg.p.to_string(),
                motion_label(&cfg.motion),
                format!("{:?}", cfg.alpha),
                format!("{:?}", cfg.beta),
                format!("{:?}", cfg.domain),
                v.label().to_string(),
                v.source.clone(),
                v.note.clone(),
            ]);
            out.summary.push(SummaryRow {
                label: name,
                config_hash: hash,
                oracle: v.label().to_string(),
                numeric: want.map_or(String::new(), |w| format!("expected {}", label(Some(w)))),
                mc: None,
                agreement: Agreement::of(&v, want),
                note: v.source.clone(),
            });
        }
        Ok(out)
    }
}
