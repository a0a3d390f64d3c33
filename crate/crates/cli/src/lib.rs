//! Batch runner behind the `supcrit` binary: declarative plans, a registry of
//! experiment strategies and CSV reports.

pub mod experiments;
pub mod plan;
pub mod run;

pub use plan::{load_plan, parse_plan, ExperimentPlan, PlanError};
pub use run::{emit_report, run, ExperimentResult, ReportStats, Status};
