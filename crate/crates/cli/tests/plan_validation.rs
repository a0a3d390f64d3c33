use supcrit_cli::experiments::{builtin_matrix, lookup, registry};
use supcrit_cli::parse_plan;
use supcrit_core::theory::predict_csp;
use supcrit_core::{CoefficientSpec, MotionSpec};

fn names(text: &str, sub: &str) -> Vec<String> {
    parse_plan(text, sub, None)
        .unwrap()
        .experiments
        .into_iter()
        .map(|e| e.name)
        .collect()
}

fn error(text: &str, sub: &str, seed: Option<u64>) -> String {
    parse_plan(text, sub, seed).unwrap_err().to_string()
}

#[test]
fn every_subcommand_is_registered_once() {
    let want = [
        "classify-pde",
        "simulate",
        "feller",
        "hitting",
        "barrier",
        "loglaplace",
        "sweep",
        "oracle",
    ];
    let got: Vec<&str> = registry().iter().map(|s| s.name()).collect();
    assert_eq!(got, want);
    for name in want {
        assert_eq!(lookup(name).unwrap().name(), name);
        assert!(!lookup(name).unwrap().about().is_empty());
    }
    assert!(lookup("run").is_none());
}

#[test]
fn empty_plan_has_no_experiments() {
    assert!(parse_plan("", "oracle", None)
        .unwrap()
        .experiments
        .is_empty());
    assert!(parse_plan("seed = 3\n", "run", None)
        .unwrap()
        .experiments
        .is_empty());
}

#[test]
fn duplicate_names_are_rejected() {
    let text = r#"
        seed = 1
        [[experiment]]
        name = "a"
        [[experiment]]
        name = "a"
    "#;
    assert!(error(text, "oracle", None).contains("duplicate"));
}

#[test]
fn reserved_and_path_like_names_are_rejected() {
    for name in ["report", "summary", "../x", "a/b", ".hidden", ""] {
        let text = format!("seed = 1\n[[experiment]]\nname = {name:?}\n");
        assert!(parse_plan(&text, "oracle", None).is_err(), "{name:?}");
    }
}

#[test]
fn seeds_must_be_explicit() {
    let text = "[[experiment]]\nname = \"a\"\n";
    assert!(error(text, "oracle", None).contains("no seed"));
    let plan = parse_plan(text, "oracle", Some(9)).unwrap();
    assert_eq!(plan.experiments[0].seed, 9);
}

#[test]
fn experiment_seed_beats_command_line_beats_plan() {
    let text = r#"
        seed = 1
        [[experiment]]
        name = "own"
        seed = 5
        [[experiment]]
        name = "inherits"
    "#;
    let plan = parse_plan(text, "oracle", None).unwrap();
    assert_eq!((plan.experiments[0].seed, plan.experiments[1].seed), (5, 1));
    let plan = parse_plan(text, "oracle", Some(7)).unwrap();
    assert_eq!((plan.experiments[0].seed, plan.experiments[1].seed), (5, 7));
}

#[test]
fn subcommand_selects_experiments() {
    let text = r#"
        seed = 1
        [[experiment]]
        name = "o"
        subcommand = "oracle"
        [[experiment]]
        name = "f"
        subcommand = "feller"
        [[experiment]]
        name = "plain"
    "#;
    assert_eq!(names(text, "oracle"), ["o", "plain"]);
    assert_eq!(names(text, "feller"), ["f", "plain"]);
    assert!(error(text, "run", None).contains("no subcommand"));
}

#[test]
fn unknown_subcommands_and_parameters_are_plan_errors() {
    let text = "seed = 1\n[[experiment]]\nname = \"a\"\nsubcommand = \"nope\"\n";
    assert!(error(text, "run", None).contains("unknown subcommand"));
    let text = "seed = 1\n[[experiment]]\nname = \"a\"\nparams = { radiii = [1.0] }\n";
    assert!(error(text, "classify-pde", None).contains("radiii"));
    let text = "seed = 1\n[[experiment]]\nname = \"a\"\nparams = { matrix = \"other\" }\n";
    assert!(error(text, "oracle", None).contains("matrix"));
    let text = "seed = 1\nbogus = 2\n";
    assert!(parse_plan(text, "run", None).is_err());
}

#[test]
fn model_overrides_merge_into_the_base() {
    let text = r#"
        seed = 1
        [model]
        d = 2
        p = 1.5
        motion = { kind = "radial_power", m = 1.0 }
        alpha = { kind = "constant", c = 2.0 }
        beta = { kind = "constant", c = 0.0 }

        [[experiment]]
        name = "a"
        model = { beta = { kind = "constant", c = -1.0 }, horizon = 2.0 }
    "#;
    let plan = parse_plan(text, "oracle", None).unwrap();
    let cfg = &plan.experiments[0].config;
    assert_eq!(cfg.d, 2);
    assert_eq!(cfg.p, 1.5);
    assert_eq!(cfg.motion, MotionSpec::radial_power(1.0));
    assert_eq!(cfg.alpha, CoefficientSpec::constant(2.0));
    assert_eq!(cfg.beta, CoefficientSpec::constant(-1.0));
    assert_eq!(cfg.horizon, 2.0);
}

#[test]
fn invalid_models_are_plan_errors() {
    let text = r#"
        seed = 1
        [[experiment]]
        name = "a"
        model = { beta = { kind = "power_law", c = 1.0, q = 1.0 } }
    "#;
    assert!(error(text, "oracle", None).contains("invalid model"));
}

#[test]
fn particle_subcommands_refuse_large_powers() {
    let text = "seed = 1\n[[experiment]]\nname = \"a\"\nmodel = { p = 3.0 }\n";
    assert!(error(text, "simulate", None).contains("unavailable"));
    assert!(parse_plan(text, "classify-pde", None).is_ok());
}

#[test]
fn builtin_matrix_has_twelve_distinct_configs() {
    let m = builtin_matrix();
    assert_eq!(m.len(), 12);
    let mut hashes: Vec<String> = m.iter().map(|(_, c, _)| c.config_hash()).collect();
    hashes.sort();
    hashes.dedup();
    assert_eq!(hashes.len(), 12);
    for (label, cfg, want) in m {
        assert_eq!(predict_csp(&cfg).value, Some(want), "{label}");
    }
}
