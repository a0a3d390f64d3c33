use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use supcrit_cli::{emit_report, load_plan, run, Status};

/// Runs declarative experiment plans on the compact support laboratory.
///
/// The subcommand selects the experiments of that kind; experiments without a
/// `subcommand` key inherit it. `run` executes the whole plan. Set
/// SUPCRIT_THREADS to cap the number of worker threads.
#[derive(Parser)]
#[command(name = "supcrit", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify compact support from maximal PDE solutions.
    ClassifyPde(Common),
    /// Particle estimate of P(support stays in a ball).
    Simulate(Common),
    /// Feller explosion test of the motion.
    Feller(Common),
    /// Particle estimate of point hitting.
    Hitting(Common),
    /// Search for explicit barriers.
    Barrier(Common),
    /// Laplace functional of the particle system against the PDE.
    Loglaplace(Common),
    /// PDE classifier over a list of motion exponents.
    Sweep(Common),
    /// Theory verdicts.
    Oracle(Common),
    /// Every experiment in the plan.
    Run(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    plan: PathBuf,
    /// Output directory; falls back to `out` in the plan.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for experiments that do not set their own.
    #[arg(long)]
    seed: Option<u64>,
}

impl Command {
    fn split(&self) -> (&'static str, &Common) {
        match self {
            Command::ClassifyPde(c) => ("classify-pde", c),
            Command::Simulate(c) => ("simulate", c),
            Command::Feller(c) => ("feller", c),
            Command::Hitting(c) => ("hitting", c),
            Command::Barrier(c) => ("barrier", c),
            Command::Loglaplace(c) => ("loglaplace", c),
            Command::Sweep(c) => ("sweep", c),
            Command::Oracle(c) => ("oracle", c),
            Command::Run(c) => ("run", c),
        }
    }
}

const PLAN_ERROR: u8 = 2;

fn threads() -> Result<Option<usize>, String> {
    match std::env::var("SUPCRIT_THREADS") {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(format!(
                "SUPCRIT_THREADS must be a positive integer (got {v:?})"
            )),
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (selected, args) = cli.command.split();
    let plan = match load_plan(&args.plan, selected, args.seed) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("plan error: {e}");
            return ExitCode::from(PLAN_ERROR);
        }
    };
    if plan.experiments.is_empty() {
        eprintln!("nothing to run");
        return ExitCode::SUCCESS;
    }
    let Some(out) = args.out.clone().or_else(|| plan.out.clone()) else {
        eprintln!("plan error: no output directory (use --out or set `out` in the plan)");
        return ExitCode::from(PLAN_ERROR);
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    match threads() {
        Ok(Some(n)) => builder = builder.num_threads(n),
        Ok(None) => {}
        Err(e) => {
            eprintln!("plan error: {e}");
            return ExitCode::from(PLAN_ERROR);
        }
    }
    let pool = match builder.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    };

    let results = match pool.install(|| run(&plan, &out)) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {}: {e}", out.display());
            return ExitCode::FAILURE;
        }
    };
    for r in &results {
        match &r.error {
            Some(e) => eprintln!("{} {}: {e}", r.status.label(), r.name),
            None => eprintln!("{} {}", r.status.label(), r.name),
        }
    }
    let stats = match emit_report(&out, &results) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("report error: {e}");
            return ExitCode::FAILURE;
        }
    };
    eprintln!(
        "{} rows: {} agree, {} disagree, {} oracle-undetermined, {} failed",
        stats.rows, stats.agree, stats.disagree, stats.undetermined, stats.failed
    );
    if results.iter().all(|r| r.status == Status::Ok) {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
