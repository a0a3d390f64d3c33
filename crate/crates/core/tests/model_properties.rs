use proptest::prelude::*;
use supcrit_core::model::{validate_config, PDE_ONLY_FLAG};
use supcrit_core::{build_coefficients, CoefficientSpec, DomainKind, Error, ModelConfig};

fn close(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= 1e-12 * a.abs().max(b.abs())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn families_match_their_formulas(
        r in 1e-3f64..1e3,
        c in 0.1f64..10.0,
        q in -3.0f64..3.0,
        s in 0.1f64..3.0,
    ) {
        let cases = [
            (CoefficientSpec::constant(c), c),
            (CoefficientSpec::power_law(c, q), c * (1.0 + r).powf(q)),
            (CoefficientSpec::stretched_exp(c, 0.5, s), c * (-0.5 * r.powf(s)).exp()),
            (CoefficientSpec::inverse_square(-c), -c / (r * r)),
            (CoefficientSpec::neg_power(c, q), -c * (1.0 + r).powf(q)),
        ];
        for (spec, want) in cases {
            prop_assert!(close(spec.eval(r), want), "{spec:?} at {r}: {} vs {want}", spec.eval(r));
        }
    }

    #[test]
    fn evaluators_follow_the_config(r in 1e-3f64..1e3, m in 0.0f64..2.0, d in 1u32..5) {
        let cfg = ModelConfig::radial(
            d,
            2.0,
            m,
            CoefficientSpec::stretched_exp(2.0, 0.3, 1.5),
            CoefficientSpec::neg_power(1.0, 0.5),
        );
        let set = build_coefficients(&cfg).unwrap();
        prop_assert!(close(set.a(r), (1.0 + r).powf(m)));
        prop_assert!(close(set.alpha(r), cfg.alpha.eval(r)));
        prop_assert!(close(set.beta(r), cfg.beta.eval(r)));
        prop_assert!(close(set.drift(r), set.a(r) * (d as f64 - 1.0) / r));
    }

    #[test]
    fn cached_bounds_are_reproducible(c in 0.1f64..10.0, q in 0.0f64..2.0) {
        let cfg = ModelConfig::radial(
            3,
            1.5,
            1.0,
            CoefficientSpec::power_law(c, q),
            CoefficientSpec::constant(-c),
        );
        let (a, b) = (build_coefficients(&cfg).unwrap(), build_coefficients(&cfg).unwrap());
        for (x, y) in [
            (a.alpha_bounds, b.alpha_bounds),
            (a.beta_bounds, b.beta_bounds),
            (a.motion_bounds, b.motion_bounds),
        ] {
            prop_assert_eq!(x.inf.to_bits(), y.inf.to_bits());
            prop_assert_eq!(x.sup.to_bits(), y.sup.to_bits());
        }
    }
}

#[test]
fn negative_alpha_is_rejected() {
    let cfg = ModelConfig::radial(
        2,
        2.0,
        0.0,
        CoefficientSpec::constant(-1.0),
        CoefficientSpec::constant(0.0),
    );
    assert!(matches!(
        build_coefficients(&cfg),
        Err(Error::NonPositiveAlpha { .. })
    ));
}

#[test]
fn beta_growing_at_infinity_is_rejected() {
    let cfg = ModelConfig::radial(
        2,
        2.0,
        0.0,
        CoefficientSpec::constant(1.0),
        CoefficientSpec::power_law(1.0, 1.0),
    );
    assert!(matches!(
        build_coefficients(&cfg),
        Err(Error::UnboundedBeta(_))
    ));
}

#[test]
fn inverse_square_beta_needs_the_origin_removed() {
    let cfg = ModelConfig::radial(
        3,
        2.0,
        0.0,
        CoefficientSpec::constant(1.0),
        CoefficientSpec::inverse_square(-0.5),
    );
    assert!(validate_config(&cfg).is_valid());
    let positive = cfg.with_beta(CoefficientSpec::inverse_square(0.5));
    assert!(!validate_config(&positive).is_valid());
    let punctured = ModelConfig::punctured_brownian(3, 2.0, CoefficientSpec::inverse_square(-0.5));
    assert_eq!(punctured.domain, DomainKind::Punctured);
    assert!(validate_config(&punctured).is_valid());
}

#[test]
fn large_powers_are_pde_only() {
    let cfg = ModelConfig::radial(
        2,
        3.0,
        0.0,
        CoefficientSpec::constant(1.0),
        CoefficientSpec::constant(0.0),
    );
    let report = validate_config(&cfg);
    assert!(report.is_valid());
    assert!(!report.particles_available());
    assert!(report.flags.iter().any(|f| f.starts_with(PDE_ONLY_FLAG)));
}
