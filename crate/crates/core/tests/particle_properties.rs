use proptest::prelude::*;
use supcrit_core::model::file::ParticleSettings;
use supcrit_core::particles::{
    build_offspring_law, default_rate_constant, estimate_csp_probability, estimate_extinction,
    generating_function_gap, loglaplace_check, mean_total_mass, radius_profile, step_population,
    NoBranching, OffspringLaw, ParticleRng, Population, Setup, TestFunction,
};
use supcrit_core::pde::mass_ode;
use supcrit_core::{build_coefficients, CoefficientSpec, ModelConfig};

/// Neumaier-compensated sum.
fn sum(values: impl Iterator<Item = f64>) -> f64 {
    let (mut s, mut c) = (0.0f64, 0.0f64);
    for v in values {
        let t = s + v;
        c += if s.abs() >= v.abs() {
            (s - t) + v
        } else {
            (v - t) + s
        };
        s = t;
    }
    s + c
}

fn moments(law: &dyn OffspringLaw, r: f64) -> (f64, f64, f64) {
    let top = law.max_offspring();
    let min = (0..=top)
        .map(|k| law.weight(k, r))
        .fold(f64::INFINITY, f64::min);
    let total = sum((0..=top).map(|k| law.weight(k, r)));
    let mean = sum((0..=top).map(|k| k as f64 * law.weight(k, r)));
    (min, total, mean)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn quadratic_weights_are_a_law(a in 0.1f64..3.0, b in -2.0f64..2.0, n in 100.0f64..5000.0, scale in 0.05f64..2.0) {
        let alpha = CoefficientSpec::constant(a);
        let beta = CoefficientSpec::constant(b);
        let law = build_offspring_law(2.0, n, &alpha, &beta, scale * default_rate_constant(2.0, n, &alpha, &beta)).unwrap();
        let (min, total, mean) = moments(&*law, 1.0);
        prop_assert!(min >= 0.0);
        prop_assert!((total - 1.0).abs() <= 1e-12, "total {}", total);
        prop_assert!((mean - law.mean(1.0)).abs() <= 1e-12, "mean {} vs {}", mean, law.mean(1.0));
        prop_assert!((law.mean(1.0) - (1.0 + b / law.rate())).abs() < 1e-12);
        prop_assert!(generating_function_gap(&*law, a, b, 1.0) < 5.0 / n.sqrt());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn stable_weights_are_a_law(p in 1.3f64..1.9, a in 0.2f64..2.0, b in -1.0f64..1.0) {
        let n = 1e4;
        let alpha = CoefficientSpec::constant(a);
        let beta = CoefficientSpec::constant(b);
        let law = build_offspring_law(p, n, &alpha, &beta, default_rate_constant(p, n, &alpha, &beta)).unwrap();
        let (min, total, mean) = moments(&*law, 1.0);
        prop_assert!(min >= 0.0);
        prop_assert!((total - 1.0).abs() <= 1e-12, "total {}", total);
        prop_assert!((mean - law.mean(1.0)).abs() <= 1e-12, "mean {} vs {}", mean, law.mean(1.0));
    }
}

#[test]
fn binary_mean_is_one_plus_beta_over_rate() {
    // p = 2: rate c n and mean 1 + β/(c n), so the mass drift is β.
    let law = build_offspring_law(
        2.0,
        500.0,
        &CoefficientSpec::constant(1.0),
        &CoefficientSpec::constant(0.7),
        2.0,
    )
    .unwrap();
    assert!((law.rate() - 1000.0).abs() < 1e-9);
    assert!((law.mean(0.0) - (1.0 + 0.7 / 1000.0)).abs() < 1e-15);
}

#[test]
fn stable_tail_has_the_right_exponent() {
    for p in [1.25, 1.5, 1.75] {
        let law = build_offspring_law(
            p,
            1e4,
            &CoefficientSpec::constant(1.0),
            &CoefficientSpec::constant(0.0),
            2.0,
        )
        .unwrap();
        for k in [100usize, 1000, 10000] {
            let slope = (law.weight(2 * k, 0.0) / law.weight(k, 0.0)).ln() / 2f64.ln();
            assert!(
                (slope + 1.0 + p).abs() < 0.02,
                "p = {p}, k = {k}: slope {slope}"
            );
        }
        // Σ k^q w_k converges for q < p and diverges for q > p: compare partial sums over octaves.
        let octave =
            |q: f64, k: usize| sum((k..2 * k).map(|j| (j as f64).powf(q) * law.weight(j, 0.0)));
        let below = octave(p - 0.25, 20000) / octave(p - 0.25, 10000);
        let above = octave(p + 0.25, 20000) / octave(p + 0.25, 10000);
        assert!(below < 1.0 && above > 1.0, "p = {p}: {below} {above}");
    }
}

#[test]
fn single_offspring_keeps_every_particle() {
    for d in 1..=3usize {
        let cfg = ModelConfig::radial(
            d as u32,
            2.0,
            1.0,
            CoefficientSpec::constant(1.0),
            CoefficientSpec::constant(0.0),
        );
        let set = build_coefficients(&cfg).unwrap();
        let law = NoBranching { n: 40.0 };
        let mut pop = Population::at_point(&vec![0.5; d], 1.0, 40.0);
        let mut rng = <ParticleRng as rand::SeedableRng>::seed_from_u64(9);
        let mut last = pop.max_radius;
        for _ in 0..200 {
            step_population(&mut pop, 0.005, &set, &law, &mut rng, 1000, None).unwrap();
            assert_eq!(pop.len(), 40);
            assert!((pop.mass() - 1.0).abs() < 1e-15);
            assert!(pop.max_radius >= last);
            last = pop.max_radius;
        }
    }
}

#[test]
fn critical_branching_keeps_the_mean_mass() {
    let spatial = ModelConfig::radial(
        2,
        2.0,
        0.0,
        CoefficientSpec::stretched_exp(1.0, 0.5, 1.0),
        CoefficientSpec::constant(0.0),
    );
    let settings = ParticleSettings {
        n: 50,
        replicas: 400,
        ..ParticleSettings::default()
    };
    for t in [0.5, 1.0] {
        let e = mean_total_mass(&spatial, &settings, t, 21).unwrap();
        assert!(e.agrees_with(1.0, 3.0, 0.0), "t = {t}: {e:?}");
    }
    let stable = ModelConfig::radial(
        1,
        1.5,
        0.0,
        CoefficientSpec::constant(1.0),
        CoefficientSpec::constant(0.0),
    );
    let settings = ParticleSettings {
        n: 200,
        replicas: 1000,
        ..ParticleSettings::default()
    };
    let e = mean_total_mass(&stable, &settings, 1.0, 22).unwrap();
    assert!(e.agrees_with(1.0, 3.0, 0.0), "{e:?}");
}

#[test]
fn laplace_functional_of_the_mass_matches_the_ode() {
    let (lambda, beta) = (1.0, 0.5);
    let cfg = ModelConfig::radial(
        1,
        2.0,
        0.0,
        CoefficientSpec::constant(1.0),
        CoefficientSpec::constant(beta),
    );
    let settings = ParticleSettings {
        n: 2000,
        replicas: 2000,
        ..ParticleSettings::default()
    };
    let report = estimate_extinction(&cfg, &settings, 1.0, 5).unwrap();
    let values: Vec<f64> = report
        .records
        .iter()
        .map(|r| (-lambda * r.final_mass).exp())
        .collect();
    let m = values.iter().sum::<f64>() / values.len() as f64;
    let sd =
        (values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (values.len() - 1) as f64).sqrt();
    let se = sd / (values.len() as f64).sqrt();
    let target = (-mass_ode(1.0, beta, 2.0, lambda, 1.0)).exp();
    assert!(
        (m - target).abs() <= 3.0 * se + 5e-3,
        "{m} ± {se} vs {target}"
    );
}

#[test]
fn laplace_functional_of_a_bump_approaches_the_pde() {
    let cfg = ModelConfig::radial(
        2,
        2.0,
        0.0,
        CoefficientSpec::constant(1.0),
        CoefficientSpec::constant(0.0),
    );
    let settings = ParticleSettings {
        replicas: 400,
        ..ParticleSettings::default()
    };
    let f = TestFunction::Bump {
        height: 2.0,
        radius: 1.5,
    };
    let report = loglaplace_check(&cfg, &settings, f, 0.0, 0.5, &[50, 200], 3).unwrap();
    assert!(report.final_within, "{report:?}");
    assert!(report.errors_shrink, "{report:?}");
}

/// `P(sup_{s<=t} |X_s| < x)` for `X = sqrt(2) W` in one dimension.
fn sup_cdf(x: f64, t: f64) -> f64 {
    let var = 2.0 * t;
    let pi = std::f64::consts::PI;
    4.0 / pi
        * (0..200)
            .map(|k| {
                let j = (2 * k + 1) as f64;
                (-1f64).powi(k) / j * (-j * j * pi * pi * var / (8.0 * x * x)).exp()
            })
            .sum::<f64>()
}

/// Median of the largest of `n` independent running maxima.
fn iid_max_median(n: i32, t: f64) -> f64 {
    let (mut lo, mut hi) = (0.05, 20.0);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if sup_cdf(mid, t).powi(n) < 0.5 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn radius_profile_without_branching_is_an_iid_maximum() {
    let n = 4;
    let cfg = ModelConfig::radial(
        1,
        2.0,
        0.0,
        CoefficientSpec::constant(1.0),
        CoefficientSpec::constant(0.0),
    );
    let dt = 1e-4;
    let settings = ParticleSettings {
        n,
        dt: Some(dt),
        ..ParticleSettings::default()
    };
    let setup = Setup::with_law(
        build_coefficients(&cfg).unwrap(),
        Box::new(NoBranching { n: n as f64 }),
        &settings,
    )
    .unwrap();
    let rows = radius_profile(&setup, &[0.25, 1.0], 2000, 17).unwrap();
    // Monitoring on the time grid misses about 0.5826 sqrt(2 dt) of the continuous maximum.
    let shift = 0.5826 * (2.0 * dt).sqrt();
    for row in rows {
        let oracle = iid_max_median(n as i32, row.t);
        assert!(
            (row.q50 + shift - oracle).abs() < 0.03 * oracle,
            "t = {}: {} vs {oracle}",
            row.t,
            row.q50
        );
        assert!(row.q50 <= row.q90 && row.q90 <= row.q99);
    }
}

#[test]
fn identical_seeds_reproduce_bitwise() {
    let cfg = ModelConfig::radial(
        2,
        2.0,
        0.0,
        CoefficientSpec::stretched_exp(1.0, 0.05, 2.0),
        CoefficientSpec::constant(0.0),
    );
    let settings = ParticleSettings {
        n: 100,
        replicas: 32,
        c: Some(0.1),
        ..ParticleSettings::default()
    };
    let a = estimate_csp_probability(&cfg, &settings, 2.0, 0.5, 0.0, 99).unwrap();
    let b = estimate_csp_probability(&cfg, &settings, 2.0, 0.5, 0.0, 99).unwrap();
    assert_eq!(a.records, b.records);
    assert_eq!(a.estimate.value.to_bits(), b.estimate.value.to_bits());
    assert_eq!(a.estimate.std_err.to_bits(), b.estimate.std_err.to_bits());
}
