use proptest::prelude::*;
use supcrit_core::theory::{
    beta0, beta_shift_invariance, comparison_extend, critical_dimension, csp_rules, predict_csp,
    Csp,
};
use supcrit_core::{CoefficientSpec, DomainKind, ModelConfig};

fn alpha_family() -> impl Strategy<Value = CoefficientSpec> {
    prop_oneof![
        (0.1f64..5.0).prop_map(CoefficientSpec::constant),
        (0.1f64..5.0, -4.0f64..3.0).prop_map(|(c, q)| CoefficientSpec::power_law(c, q)),
        (0.1f64..5.0, 0.01f64..2.0, 0.1f64..3.0)
            .prop_map(|(c, k, s)| CoefficientSpec::stretched_exp(c, k, s)),
    ]
}

fn beta_family() -> impl Strategy<Value = CoefficientSpec> {
    prop_oneof![
        (-5.0f64..5.0).prop_map(CoefficientSpec::constant),
        (0.1f64..5.0, 0.0f64..3.0).prop_map(|(c, q)| CoefficientSpec::neg_power(c, q)),
        (-3.0f64..-0.01).prop_map(CoefficientSpec::inverse_square),
    ]
}

fn config() -> impl Strategy<Value = ModelConfig> {
    (
        1u32..6,
        prop_oneof![Just(1.2), Just(1.5), Just(2.0), Just(2.5)],
        prop_oneof![
            Just(0.0),
            Just(0.5),
            Just(1.0),
            Just(2.0),
            Just(2.5),
            Just(3.0)
        ],
        alpha_family(),
        beta_family(),
        any::<bool>(),
    )
        .prop_map(|(d, p, m, alpha, beta, punctured)| {
            let cfg = ModelConfig::radial(d, p, m, alpha, beta);
            if punctured {
                cfg.with_domain(DomainKind::Punctured)
            } else {
                cfg
            }
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn decisive_rules_never_disagree(cfg in config()) {
        let values: Vec<(Csp, String)> = csp_rules(&cfg)
            .into_iter()
            .filter_map(|v| v.value.map(|x| (x, v.source)))
            .collect();
        if let Some((first, _)) = values.first() {
            prop_assert!(values.iter().all(|(v, _)| v == first), "{cfg:?}: {values:?}");
            prop_assert_eq!(predict_csp(&cfg).value, Some(*first));
        }
    }

    #[test]
    fn undetermined_verdicts_list_what_is_missing(cfg in config()) {
        let v = predict_csp(&cfg);
        prop_assert_eq!(v.value.is_none(), !v.unmet.is_empty());
    }

    #[test]
    fn comparison_is_reflexive(cfg in config()) {
        let v = predict_csp(&cfg);
        let same = comparison_extend(&v, &cfg, &cfg);
        prop_assert_eq!(same.value, v.value);
    }

    #[test]
    fn comparison_is_transitive(c1 in 0.1f64..1.0, g2 in 1.0f64..3.0, g3 in 1.0f64..3.0, holds in any::<bool>()) {
        // Constant alpha with bounded beta holds; scaling alpha up keeps it,
        // and an explosive motion with alpha decreasing along the chain keeps failing.
        let (m, scale) = if holds { (0.0, [1.0, g2, g2 * g3]) } else { (3.0, [g2 * g3, g2, 1.0]) };
        let chain: Vec<ModelConfig> = scale
            .iter()
            .map(|s| ModelConfig::radial(3, 2.0, m, CoefficientSpec::constant(c1 * s), CoefficientSpec::constant(0.0)))
            .collect();
        let base = predict_csp(&chain[0]);
        prop_assert!(base.value.is_some());
        let step = comparison_extend(&comparison_extend(&base, &chain[0], &chain[1]), &chain[1], &chain[2]);
        let direct = comparison_extend(&base, &chain[0], &chain[2]);
        prop_assert_eq!(step.value, base.value);
        prop_assert_eq!(direct.value, base.value);
    }

    #[test]
    fn bounded_shift_keeps_the_verdict(cfg in config(), b in -5.0f64..5.0) {
        let bounded = |s: &CoefficientSpec| matches!(s, CoefficientSpec::Constant { .. });
        prop_assume!(bounded(&cfg.beta));
        let shifted = CoefficientSpec::constant(cfg.beta.eval(1.0) + b);
        let v = beta_shift_invariance(&cfg, &shifted, b.abs() + 1e-12).unwrap();
        prop_assert_eq!(v.value, predict_csp(&cfg).value);
    }
}

#[test]
fn beta0_sign_matches_the_critical_dimension() {
    for d in 2..=10 {
        for p in [1.1, 1.5, 2.0] {
            let below = (d as f64) < critical_dimension(p);
            assert_eq!(beta0(d as f64, p) < 0.0, below, "d = {d}, p = {p}");
        }
    }
}

#[test]
fn beta0_vanishes_at_the_critical_dimension() {
    for p in [1.1, 1.25, 1.5, 2.0, 3.0] {
        assert!(beta0(critical_dimension(p), p).abs() < 1e-9);
    }
}
