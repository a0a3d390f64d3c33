//! Executes a plan and writes its artifacts.
//!
//! Every experiment writes `<name>.csv`; the run ends with `report.csv`, one
//! row per summary row of every experiment, and `summary.txt`. Only the first
//! line of `summary.txt` carries a timestamp, so reruns of a plan give
//! byte-identical CSVs.

use std::fmt;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;

use crate::experiments::{num, Agreement, Context, Outcome, FAILED};
use crate::plan::ExperimentPlan;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Ok,
    /// Some sub-runs failed; the rest are reported.
    Partial,
    Failed,
}

impl Status {
    pub fn label(self) -> &'static str {
        match self {
            Status::Ok => "OK",
            Status::Partial => "PARTIAL",
            Status::Failed => "FAILED",
        }
    }
}

#[derive(Debug)]
pub struct ExperimentResult {
    pub name: String,
    pub subcommand: &'static str,
    pub status: Status,
    pub outcome: Option<Outcome>,
    pub error: Option<String>,
    pub csv: Option<PathBuf>,
}

#[derive(Debug)]
pub enum ReportError {
    MissingArtifacts(Vec<PathBuf>),
    Io(io::Error),
}

impl fmt::Display for ReportError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReportError::MissingArtifacts(p) => {
                let list: Vec<String> = p.iter().map(|x| x.display().to_string()).collect();
                write!(f, "missing artifacts: {}", list.join(", "))
            }
            ReportError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for ReportError {}

impl From<io::Error> for ReportError {
    fn from(e: io::Error) -> Self {
        ReportError::Io(e)
    }
}

/// Writes through a temporary file and a rename, so readers never see half a file.
fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)
}

fn csv_bytes(header: &[&str], rows: &[Vec<String>]) -> io::Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.into_inner().map_err(|e| e.into_error())
}

fn run_one(exp: &crate::plan::Experiment, out: &Path) -> ExperimentResult {
    let ctx = Context {
        name: &exp.name,
        config: &exp.config,
        seed: exp.seed,
    };
    let mut result = ExperimentResult {
        name: exp.name.clone(),
        subcommand: exp.subcommand,
        status: Status::Failed,
        outcome: None,
        error: None,
        csv: None,
    };
    let outcome = match exp.job.run(&ctx) {
        Ok(o) => o,
        Err(e) => {
            result.error = Some(e.to_string());
            return result;
        }
    };
    let path = out.join(format!("{}.csv", exp.name));
    match csv_bytes(&outcome.header, &outcome.rows).and_then(|b| write_atomic(&path, &b)) {
        Ok(()) => {
            result.status = if outcome.failures.is_empty() {
                Status::Ok
            } else {
                Status::Partial
            };
            if !outcome.failures.is_empty() {
                result.error = Some(outcome.failures.join("; "));
            }
            result.csv = Some(path);
            result.outcome = Some(outcome);
        }
        Err(e) => result.error = Some(format!("{}: {e}", path.display())),
    }
    result
}

/// Runs every experiment of the plan, concurrently, in the current rayon pool.
/// Results come back in plan order. An empty plan touches nothing.
pub fn run(plan: &ExperimentPlan, out: &Path) -> io::Result<Vec<ExperimentResult>> {
    if plan.experiments.is_empty() {
        return Ok(Vec::new());
    }
    fs::create_dir_all(out)?;
    Ok(plan
        .experiments
        .par_iter()
        .map(|e| run_one(e, out))
        .collect())
}

const REPORT_HEADER: [&str; 13] = [
    "experiment",
    "subcommand",
    "status",
    "label",
    "config_hash",
    "oracle",
    "numeric",
    "mc_value",
    "mc_std_err",
    "mc_ci_lo",
    "mc_ci_hi",
    "agreement",
    "note",
];

/// Counts over the summary rows of a run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ReportStats {
    pub rows: usize,
    pub agree: usize,
    pub disagree: usize,
    pub undetermined: usize,
    pub failed: usize,
}

fn report_rows(results: &[ExperimentResult]) -> (Vec<Vec<String>>, ReportStats) {
    let mut rows = Vec::new();
    let mut stats = ReportStats::default();
    for r in results {
        let Some(outcome) = &r.outcome else {
            stats.failed += 1;
            let mut row = vec![String::new(); REPORT_HEADER.len()];
            row[0] = r.name.clone();
            row[1] = r.subcommand.to_string();
            row[2] = Status::Failed.label().to_string();
            row[12] = r.error.clone().unwrap_or_default();
            rows.push(row);
            continue;
        };
        for s in &outcome.summary {
            stats.rows += 1;
            match s.agreement {
                Agreement::Agree => stats.agree += 1,
                Agreement::Disagree => stats.disagree += 1,
                Agreement::OracleUndetermined => stats.undetermined += 1,
                Agreement::NoVerdict => {}
            }
            let failed = s.numeric == FAILED;
            if failed {
                stats.failed += 1;
            }
            let mc = |f: fn(&supcrit_core::stats::Estimate) -> f64| {
                s.mc.as_ref().map_or(String::new(), |e| num(f(e)))
            };
            rows.push(vec![
                r.name.clone(),
                r.subcommand.to_string(),
                if failed { Status::Failed } else { Status::Ok }
                    .label()
                    .to_string(),
                s.label.clone(),
                s.config_hash.clone(),
                s.oracle.clone(),
                s.numeric.clone(),
                mc(|e| e.value),
                mc(|e| e.std_err),
                mc(|e| e.ci_lo),
                mc(|e| e.ci_hi),
                s.agreement.label().to_string(),
                s.note.clone(),
            ]);
        }
    }
    (rows, stats)
}

/// Writes `report.csv` and `summary.txt`. Every experiment reported as
/// written must still have its CSV on disk.
pub fn emit_report(out: &Path, results: &[ExperimentResult]) -> Result<ReportStats, ReportError> {
    let missing: Vec<PathBuf> = results
        .iter()
        .filter_map(|r| r.csv.as_ref())
        .filter(|p| !p.is_file())
        .cloned()
        .collect();
    if !missing.is_empty() {
        return Err(ReportError::MissingArtifacts(missing));
    }
    let (rows, stats) = report_rows(results);
    write_atomic(&out.join("report.csv"), &csv_bytes(&REPORT_HEADER, &rows)?)?;

    let stamp = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs());
    let mut text = format!("generated at unix time {stamp}\n\n");
    for r in results {
        text.push_str(&format!(
            "{} [{}] {}\n",
            r.name,
            r.subcommand,
            r.status.label()
        ));
        if let Some(e) = &r.error {
            text.push_str(&format!("  error: {e}\n"));
        }
        for s in r.outcome.iter().flat_map(|o| &o.summary) {
            let mc = s.mc.map_or(String::new(), |e| {
                format!("  mc {:.4} [{:.4}, {:.4}]", e.value, e.ci_lo, e.ci_hi)
            });
            text.push_str(&format!(
                "  {}: oracle {}  numeric {}{}  {}\n",
                s.label,
                if s.oracle.is_empty() { "-" } else { &s.oracle },
                if s.numeric.is_empty() {
                    "-"
                } else {
                    &s.numeric
                },
                mc,
                s.agreement.label()
            ));
        }
    }
    let compared = stats.agree + stats.disagree;
    text.push_str(&format!(
        "\n{} rows: {} agree, {} disagree, {} oracle-undetermined, {} failed\n",
        stats.rows, stats.agree, stats.disagree, stats.undetermined, stats.failed
    ));
    if compared > 0 {
        text.push_str(&format!(
            "agreement rate {:.1}% of {compared} compared rows\n",
            100.0 * stats.agree as f64 / compared as f64
        ));
    }
    write_atomic(&out.join("summary.txt"), text.as_bytes())?;
    Ok(stats)
}
