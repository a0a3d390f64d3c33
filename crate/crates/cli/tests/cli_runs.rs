use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use supcrit_cli::run::ExperimentResult;
use supcrit_cli::{emit_report, Status};
use tempfile::TempDir;

const BASE: &str = r#"
seed = 11

[model]
d = 3
p = 2.0
motion = { kind = "radial_power", m = 0.0 }
alpha = { kind = "stretched_exp", c1 = 1.0, c2 = 1.0, s = 2.0 }
beta = { kind = "constant", c = 0.0 }
"#;

fn supcrit(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_supcrit"));
    cmd.args(args).env_remove("SUPCRIT_THREADS");
    if let Some(t) = threads {
        cmd.env("SUPCRIT_THREADS", t);
    }
    cmd.output().unwrap()
}

fn write_plan(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("plan.toml");
    fs::write(&path, body).unwrap();
    path
}

/// Runs `sub` on `plan` with output in `dir/name`.
fn run_plan(
    dir: &Path,
    plan: &Path,
    sub: &str,
    name: &str,
    threads: Option<&str>,
) -> (Output, PathBuf) {
    let out = dir.join(name);
    let o = supcrit(
        &[
            sub,
            "--plan",
            plan.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ],
        threads,
    );
    (o, out)
}

fn report(out: &Path) -> Vec<csv::StringRecord> {
    let mut r = csv::Reader::from_path(out.join("report.csv")).unwrap();
    assert_eq!(r.headers().unwrap().len(), 13);
    r.records().map(|x| x.unwrap()).collect()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn empty_plan_succeeds_without_artifacts() {
    let dir = TempDir::new().unwrap();
    let plan = write_plan(dir.path(), "seed = 1\n");
    let (o, out) = run_plan(dir.path(), &plan, "run", "out", None);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(!out.exists());
}

#[test]
fn plan_errors_exit_with_two() {
    let dir = TempDir::new().unwrap();
    let cases = [
        "seed = 1\n[[experiment]]\nname = \"a\"\n[[experiment]]\nname = \"a\"\n",
        "[[experiment]]\nname = \"a\"\n",
        "seed = 1\n[[experiment]]\nname = \"a\"\nparams = { nope = 1 }\n",
        "seed = 1\n[[experiment]]\nname = \"a\"\nmodel = { p = 0.5 }\n",
        "this is not toml",
    ];
    for text in cases {
        let plan = write_plan(dir.path(), text);
        let (o, out) = run_plan(dir.path(), &plan, "oracle", "out", None);
        assert_eq!(o.status.code(), Some(2), "{text}: {}", stderr(&o));
        assert!(!out.exists(), "{text}");
    }
    let (o, _) = run_plan(
        dir.path(),
        &dir.path().join("missing.toml"),
        "oracle",
        "out",
        None,
    );
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn missing_output_directory_is_a_plan_error() {
    let dir = TempDir::new().unwrap();
    let plan = write_plan(dir.path(), "seed = 1\n[[experiment]]\nname = \"a\"\n");
    let o = supcrit(&["oracle", "--plan", plan.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bad_thread_count_is_a_plan_error() {
    let dir = TempDir::new().unwrap();
    let plan = write_plan(dir.path(), "seed = 1\n[[experiment]]\nname = \"a\"\n");
    for t in ["0", "many", "-2"] {
        let (o, out) = run_plan(dir.path(), &plan, "oracle", "out", Some(t));
        assert_eq!(o.status.code(), Some(2), "{t}");
        assert!(!out.exists());
    }
}

#[test]
fn builtin_oracle_matrix_agrees_everywhere() {
    let dir = TempDir::new().unwrap();
    let plan = write_plan(
        dir.path(),
        "seed = 1\n[[experiment]]\nname = \"matrix\"\nparams = { matrix = \"builtin\" }\n",
    );
    let (o, out) = run_plan(dir.path(), &plan, "oracle", "out", None);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rows = report(&out);
    assert_eq!(rows.len(), 12);
    assert!(rows.iter().all(|r| &r[11] == "AGREE"), "{rows:?}");
    let table = fs::read_to_string(out.join("matrix.csv")).unwrap();
    assert_eq!(table.lines().count(), 13);
    assert!(fs::read_to_string(out.join("summary.txt"))
        .unwrap()
        .contains("12 agree, 0 disagree"));
}

#[test]
fn sweep_of_motion_exponents_keeps_compact_support() {
    // α = exp(-r^(2-m)) sits exactly on the boundary for every m.
    let dir = TempDir::new().unwrap();
    let body = format!(
        "{BASE}\n[[experiment]]\nname = \"sweep\"\nparams = {{ m = [0, 1, 2], alpha_decay_offset = 2.0, probe_t = 0.05, radii = [1, 2, 4, 8, 16] }}\n"
    );
    let plan = write_plan(dir.path(), &body);
    let (o, out) = run_plan(dir.path(), &plan, "sweep", "out", None);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rows = report(&out);
    assert_eq!(rows.len(), 3);
    for r in &rows {
        assert_eq!((&r[5], &r[6], &r[11]), ("Holds", "Holds", "AGREE"), "{r:?}");
    }
}

#[test]
fn failing_sub_run_is_reported_and_the_rest_survive() {
    // At r = 32 the m = 0 coefficient exp(-r^2) underflows to zero.
    let dir = TempDir::new().unwrap();
    let body = format!(
        "{BASE}\n[[experiment]]\nname = \"sweep\"\nsubcommand = \"sweep\"\nparams = {{ m = [0, 1, 2], alpha_decay_offset = 2.0, probe_t = 0.05, radii = [4, 8, 16, 32] }}\n\
         [[experiment]]\nname = \"matrix\"\nsubcommand = \"oracle\"\nparams = {{ matrix = \"builtin\" }}\n"
    );
    let plan = write_plan(dir.path(), &body);
    let (o, out) = run_plan(dir.path(), &plan, "run", "out", None);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    let rows = report(&out);
    let sweep: Vec<_> = rows.iter().filter(|r| &r[0] == "sweep").collect();
    assert_eq!(sweep.len(), 3);
    assert_eq!((&sweep[0][2], &sweep[0][6]), ("FAILED", "FAILED"));
    for r in &sweep[1..] {
        assert_eq!((&r[2], &r[6]), ("OK", "Holds"), "{r:?}");
    }
    assert_eq!(rows.iter().filter(|r| &r[0] == "matrix").count(), 12);
    assert!(fs::read_to_string(out.join("summary.txt"))
        .unwrap()
        .contains("sweep [sweep] PARTIAL"));
}

#[test]
fn failing_experiment_leaves_others_intact() {
    let dir = TempDir::new().unwrap();
    let body = format!(
        "{BASE}\n[[experiment]]\nname = \"broken\"\nsubcommand = \"classify-pde\"\nparams = {{ radii = [] }}\n\
         [[experiment]]\nname = \"matrix\"\nsubcommand = \"oracle\"\nparams = {{ matrix = \"builtin\" }}\n"
    );
    let plan = write_plan(dir.path(), &body);
    let (o, out) = run_plan(dir.path(), &plan, "run", "out", None);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert!(!out.join("broken.csv").exists());
    assert!(out.join("matrix.csv").exists());
    let rows = report(&out);
    assert_eq!(
        rows.iter()
            .filter(|r| &r[0] == "broken" && &r[2] == "FAILED")
            .count(),
        1
    );
    assert_eq!(rows.iter().filter(|r| &r[0] == "matrix").count(), 12);
}

const MIXED: &str = r#"
[[experiment]]
name = "mc"
subcommand = "simulate"
params = { n = 20, replicas = 200, ball = 1.5, x0 = 0.0, t = 0.5, pde = false }

[[experiment]]
name = "pde"
subcommand = "classify-pde"
params = { radii = [1.0, 2.0, 4.0], nodes = 100, steps = 100, probe_t = 0.05 }

[[experiment]]
name = "matrix"
subcommand = "oracle"
"#;

fn csvs(out: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = fs::read_dir(out)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .map(|p| {
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                fs::read(&p).unwrap(),
            )
        })
        .collect();
    v.sort();
    v
}

#[test]
fn reruns_are_byte_identical_for_any_thread_count() {
    let dir = TempDir::new().unwrap();
    let plan = write_plan(dir.path(), &format!("{BASE}{MIXED}"));
    let (a, out_a) = run_plan(dir.path(), &plan, "run", "a", Some("1"));
    let (b, out_b) = run_plan(dir.path(), &plan, "run", "b", Some("3"));
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    assert_eq!(b.status.code(), Some(0), "{}", stderr(&b));
    let (ca, cb) = (csvs(&out_a), csvs(&out_b));
    assert_eq!(ca.len(), 4);
    assert_eq!(ca, cb);

    let sa = fs::read_to_string(out_a.join("summary.txt")).unwrap();
    let sb = fs::read_to_string(out_b.join("summary.txt")).unwrap();
    assert!(sa.starts_with("generated at unix time "));
    assert_eq!(
        sa.lines().skip(1).collect::<Vec<_>>(),
        sb.lines().skip(1).collect::<Vec<_>>()
    );
}

#[test]
fn seed_changes_monte_carlo_output_only() {
    let dir = TempDir::new().unwrap();
    let plan = write_plan(
        dir.path(),
        MIXED.replace("subcommand = \"simulate\"\n", "").as_str(),
    );
    let seeded = |seed: &str, name: &str| {
        let out = dir.path().join(name);
        let o = supcrit(
            &[
                "simulate",
                "--plan",
                plan.to_str().unwrap(),
                "--out",
                out.to_str().unwrap(),
                "--seed",
                seed,
            ],
            None,
        );
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        fs::read(out.join("mc.csv")).unwrap()
    };
    assert_eq!(seeded("5", "x"), seeded("5", "y"));
    assert_ne!(seeded("5", "x"), seeded("6", "z"));
}

#[test]
fn report_refuses_missing_artifacts() {
    let dir = TempDir::new().unwrap();
    let gone = dir.path().join("gone.csv");
    let results = vec![ExperimentResult {
        name: "gone".into(),
        subcommand: "oracle",
        status: Status::Ok,
        outcome: None,
        error: None,
        csv: Some(gone.clone()),
    }];
    match emit_report(dir.path(), &results) {
        Err(supcrit_cli::run::ReportError::MissingArtifacts(p)) => assert_eq!(p, vec![gone]),
        other => panic!("{other:?}"),
    }
    assert!(!dir.path().join("report.csv").exists());
}
