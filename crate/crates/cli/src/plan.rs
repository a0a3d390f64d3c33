//! Declarative experiment plans.
//!
//! A plan is a TOML file with an optional base `[model]`, an optional default
//! `seed` and a list of `[[experiment]]` tables:
//!
//! ```toml
//! seed = 1
//!
//! [model]
//! d = 3
//! p = 2.0
//! motion = { kind = "radial_power", m = 0.0 }
//! alpha = { kind = "constant", c = 1.0 }
//! beta = { kind = "constant", c = 0.0 }
//!
//! [[experiment]]
//! name = "holds"
//! subcommand = "classify-pde"
//! model = { alpha = { kind = "stretched_exp", c1 = 1.0, c2 = 0.05, s = 2.0 } }
//! params = { radii = [4.0, 6.0, 8.0] }
//! ```
//!
//! Experiment `model` tables override keys of the base model one level deep.

use std::collections::HashSet;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use supcrit_core::{validate_config, CoefficientSpec, ModelConfig};

use crate::experiments::{lookup, Job};

#[derive(Debug)]
pub struct PlanError(pub String);

impl fmt::Display for PlanError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for PlanError {}

fn err(msg: impl Into<String>) -> PlanError {
    PlanError(msg.into())
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPlan {
    seed: Option<u64>,
    out: Option<PathBuf>,
    model: Option<toml::Table>,
    #[serde(default, rename = "experiment")]
    experiments: Vec<RawExperiment>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawExperiment {
    name: String,
    subcommand: Option<String>,
    seed: Option<u64>,
    #[serde(default)]
    model: toml::Table,
    #[serde(default)]
    params: toml::Table,
}

/// One validated experiment, ready to run.
pub struct Experiment {
    pub name: String,
    pub subcommand: &'static str,
    pub config: ModelConfig,
    pub seed: u64,
    pub job: Box<dyn Job>,
}

impl fmt::Debug for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Experiment")
            .field("name", &self.name)
            .field("subcommand", &self.subcommand)
            .field("seed", &self.seed)
            .finish()
    }
}

#[derive(Debug)]
pub struct ExperimentPlan {
    pub experiments: Vec<Experiment>,
    pub out: Option<PathBuf>,
}

/// Model used when the plan has no `[model]` table: Brownian-type motion in
/// `d = 3`, `p = 2`, `α = 1`, `β = 0`.
pub fn default_model() -> ModelConfig {
    ModelConfig::radial(
        3,
        2.0,
        0.0,
        CoefficientSpec::constant(1.0),
        CoefficientSpec::constant(0.0),
    )
}

/// Parses and validates a plan.
///
/// `selected` is the subcommand given on the command line; experiments of
/// other subcommands are left out, and experiments without one inherit it.
/// `run` selects everything. `seed` replaces the plan-level default seed.
pub fn parse_plan(
    text: &str,
    selected: &str,
    seed: Option<u64>,
) -> Result<ExperimentPlan, PlanError> {
    let raw: RawPlan =
        toml::from_str(text).map_err(|e| err(format!("plan does not parse: {e}")))?;
    let base = match raw.model {
        Some(t) => t,
        None => toml::Table::try_from(default_model()).map_err(|e| err(e.to_string()))?,
    };
    let default_seed = seed.or(raw.seed);

    let mut names = HashSet::new();
    for e in &raw.experiments {
        if e.name.is_empty() || e.name.contains(['/', '\\']) || e.name.starts_with('.') {
            return Err(err(format!(
                "experiment name {:?} is not a valid file stem",
                e.name
            )));
        }
        if e.name == "report" || e.name == "summary" {
            return Err(err(format!("experiment name {:?} is reserved", e.name)));
        }
        if !names.insert(e.name.as_str()) {
            return Err(err(format!("duplicate experiment name {:?}", e.name)));
        }
    }

    let mut experiments = Vec::new();
    for e in raw.experiments {
        let sub = match (&e.subcommand, selected) {
            (Some(s), _) => s.as_str(),
            (None, "run") => return Err(err(format!("{}: no subcommand", e.name))),
            (None, s) => s,
        };
        let strategy =
            lookup(sub).ok_or_else(|| err(format!("{}: unknown subcommand {sub:?}", e.name)))?;
        if selected != "run" && strategy.name() != selected {
            continue;
        }
        let mut table = base.clone();
        for (k, v) in e.model {
            table.insert(k, v);
        }
        let config: ModelConfig = toml::Value::Table(table)
            .try_into()
            .map_err(|x| err(format!("{}: model: {x}", e.name)))?;
        let report = validate_config(&config);
        if !report.is_valid() {
            let list: Vec<String> = report
                .violations
                .iter()
                .map(|v| format!("{}: {}", v.field, v.message))
                .collect();
            return Err(err(format!(
                "{}: invalid model: {}",
                e.name,
                list.join("; ")
            )));
        }
        let seed = e.seed.or(default_seed).ok_or_else(|| {
            err(format!(
                "{}: no seed (set it on the experiment, the plan or with --seed)",
                e.name
            ))
        })?;
        let job = strategy
            .prepare(e.params, &config)
            .map_err(|x| err(format!("{}: params: {x}", e.name)))?;
        experiments.push(Experiment {
            name: e.name,
            subcommand: strategy.name(),
            config,
            seed,
            job,
        });
    }
    Ok(ExperimentPlan {
        experiments,
        out: raw.out,
    })
}

pub fn load_plan(
    path: &Path,
    selected: &str,
    seed: Option<u64>,
) -> Result<ExperimentPlan, PlanError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| err(format!("{}: {e}", path.display())))?;
    parse_plan(&text, selected, seed)
}
