//! Strategy registry: one [`Strategy`] per subcommand.
//!
//! A strategy turns the `params` table of an experiment into a [`Job`] at plan
//! validation time, so malformed parameters are plan errors rather than run
//! failures.

mod motion;
mod oracle;
mod particles;
mod pde;

use serde::de::DeserializeOwned;
use serde::Serialize;
use supcrit_core::stats::Estimate;
use supcrit_core::theory::Outcome as VerdictOutcome;
use supcrit_core::{ModelConfig, Verdict};

pub use oracle::builtin_matrix;

/// Everything a job needs besides its own parameters.
pub struct Context<'a> {
    pub name: &'a str,
    pub config: &'a ModelConfig,
    pub seed: u64,
}

pub trait Strategy: Sync {
    fn name(&self) -> &'static str;
    fn about(&self) -> &'static str;
    fn prepare(&self, params: toml::Table, config: &ModelConfig) -> Result<Box<dyn Job>, String>;
}

pub trait Job: Send + Sync {
    fn run(&self, ctx: &Context) -> supcrit_core::Result<Outcome>;
}

static REGISTRY: &[&dyn Strategy] = &[
    &pde::ClassifyPde,
    &particles::Simulate,
    &motion::Feller,
    &particles::Hitting,
    &pde::BarrierSearch,
    &particles::LogLaplace,
    &pde::Sweep,
    &oracle::Oracle,
];

pub fn registry() -> &'static [&'static dyn Strategy] {
    REGISTRY
}

pub fn lookup(name: &str) -> Option<&'static dyn Strategy> {
    REGISTRY.iter().copied().find(|s| s.name() == name)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Agreement {
    Agree,
    Disagree,
    OracleUndetermined,
    /// The numerics gave no verdict to compare.
    NoVerdict,
}

impl Agreement {
    pub fn label(self) -> &'static str {
        match self {
            Agreement::Agree => "AGREE",
            Agreement::Disagree => "DISAGREE",
            Agreement::OracleUndetermined => "ORACLE-UNDETERMINED",
            Agreement::NoVerdict => "NO-VERDICT",
        }
    }

    pub fn of<T: VerdictOutcome>(oracle: &Verdict<T>, numeric: Option<T>) -> Self {
        match (oracle.value, numeric) {
            (None, _) => Agreement::OracleUndetermined,
            (_, None) => Agreement::NoVerdict,
            (Some(a), Some(b)) if a == b => Agreement::Agree,
            _ => Agreement::Disagree,
        }
    }

    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Agreement::Agree
        } else {
            Agreement::Disagree
        }
    }
}

/// `numeric` value of a summary row whose sub-run failed.
pub const FAILED: &str = "FAILED";

/// One line of the consolidated report.
#[derive(Clone, Debug)]
pub struct SummaryRow {
    pub label: String,
    pub config_hash: String,
    pub oracle: String,
    /// PDE or other deterministic numeric result.
    pub numeric: String,
    pub mc: Option<Estimate>,
    pub agreement: Agreement,
    pub note: String,
}

/// What a job produced: its own table plus summary rows.
#[derive(Clone, Debug, Default)]
pub struct Outcome {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    pub summary: Vec<SummaryRow>,
    /// Sub-runs that failed while the rest completed.
    pub failures: Vec<String>,
}

/// Deserializes `params` into `P` and rejects keys `P` does not know.
pub(crate) fn parse_params<P: DeserializeOwned + Serialize>(
    params: toml::Table,
) -> Result<P, String> {
    let keys: Vec<String> = params.keys().cloned().collect();
    let parsed: P = toml::Value::Table(params)
        .try_into()
        .map_err(|e| e.to_string())?;
    let known = toml::Table::try_from(&parsed).map_err(|e| e.to_string())?;
    if let Some(k) = keys.iter().find(|k| !known.contains_key(*k)) {
        return Err(format!("unknown parameter {k:?}"));
    }
    Ok(parsed)
}

/// Shortest round-trip form, in exponent notation far from 1.
pub(crate) fn num(x: f64) -> String {
    if x != 0.0 && x.is_finite() && !(1e-4..1e15).contains(&x.abs()) {
        format!("{x:e}")
    } else {
        x.to_string()
    }
}

pub(crate) fn label<T: VerdictOutcome>(v: Option<T>) -> String {
    v.map_or("Undetermined", |x| x.label()).to_string()
}
