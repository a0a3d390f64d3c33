use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::offspring::OffspringLaw;
use super::ParticleRng;
use crate::error::{Error, Result};
use crate::model::{CoefficientSet, Coordinate};

/// Largest allowed `rate * dt`.
pub const MAX_BRANCH_PROBABILITY: f64 = 0.1;
/// Particles beyond this radius have left every bounded set.
pub const EXPLOSION_RADIUS: f64 = 1e12;

/// Particles of mass `1/n` in `R^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct Population {
    dim: usize,
    positions: Vec<f64>,
    scale: f64,
    pub time: f64,
    /// Largest radius reached by any particle so far.
    pub max_radius: f64,
    /// Particles that left through infinity.
    pub lost: usize,
}

impl Population {
    /// `round(mass * n)` particles at `point`.
    pub fn at_point(point: &[f64], mass: f64, n: f64) -> Self {
        let count = (mass * n).round() as usize;
        let mut positions = Vec::with_capacity(count * point.len());
        for _ in 0..count {
            positions.extend_from_slice(point);
        }
        let r0 = norm(point);
        Population {
            dim: point.len(),
            positions,
            scale: n,
            time: 0.0,
            max_radius: if count > 0 { r0 } else { 0.0 },
            lost: 0,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.positions.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// `<1, X_n(t)>`.
    pub fn mass(&self) -> f64 {
        self.len() as f64 / self.scale
    }

    pub fn position(&self, i: usize) -> &[f64] {
        &self.positions[i * self.dim..(i + 1) * self.dim]
    }

    pub fn positions(&self) -> impl Iterator<Item = &[f64]> {
        self.positions.chunks_exact(self.dim)
    }

    /// `<f, X_n(t)>` for a radial `f`.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.positions().map(|x| f(norm(x))).sum::<f64>() / self.scale
    }
}

pub(crate) fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Called for every moved particle with `(from, to, variance per coordinate)`.
pub type Observer<'a> = dyn FnMut(&[f64], &[f64], f64, &mut ParticleRng) + 'a;

/// Moves every particle by one Euler-Maruyama step of `dX = sqrt(2A(|X|)) dW`,
/// then lets it branch with probability `rate * dt` into `k` copies at its
/// new position, `k` drawn from `law` there.
pub fn step_population(
    pop: &mut Population,
    dt: f64,
    set: &CoefficientSet,
    law: &dyn OffspringLaw,
    rng: &mut ParticleRng,
    cap: usize,
    observer: Option<&mut Observer<'_>>,
) -> Result<()> {
    let q = law.rate() * dt;
    if q > MAX_BRANCH_PROBABILITY * (1.0 + 1e-9) {
        return Err(Error::Precondition(format!(
            "rate * dt = {q} exceeds {MAX_BRANCH_PROBABILITY}; reduce dt"
        )));
    }
    if !matches!(set.coordinate(), Coordinate::Radial { .. }) {
        return Err(Error::Precondition(
            "particles need an isotropic motion A(|x|) Δ".into(),
        ));
    }
    let dim = pop.dim;
    let mut observer = observer;
    let mut next = Vec::with_capacity(pop.positions.len() + dim * 8);
    let mut moved = vec![0.0; dim];
    let mut max_r = pop.max_radius;
    for x in pop.positions.chunks_exact(dim) {
        let var = 2.0 * set.a(norm(x)) * dt;
        let sd = var.sqrt();
        for (m, &v) in moved.iter_mut().zip(x) {
            let z: f64 = StandardNormal.sample(rng);
            *m = v + sd * z;
        }
        let r = norm(&moved);
        if !(r < EXPLOSION_RADIUS) {
            pop.lost += 1;
            max_r = f64::INFINITY;
            continue;
        }
        max_r = max_r.max(r);
        if let Some(obs) = observer.as_mut() {
            obs(x, &moved, var, rng);
        }
        let copies = if q > 0.0 && rng.random::<f64>() < q {
            law.sample(r, rng)
        } else {
            1
        };
        for _ in 0..copies {
            next.extend_from_slice(&moved);
        }
        if next.len() / dim > cap {
            return Err(Error::PopulationExplosionCap {
                count: next.len() / dim,
                cap,
            });
        }
    }
    pop.positions = next;
    pop.max_radius = max_r;
    pop.time += dt;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffusion::replica_rng;
    use crate::model::{build_coefficients, CoefficientSpec, ModelConfig};
    use crate::particles::offspring::{build_offspring_law, NoBranching};

    fn set() -> CoefficientSet {
        build_coefficients(&ModelConfig::radial(
            2,
            2.0,
            0.0,
            CoefficientSpec::constant(1.0),
            CoefficientSpec::constant(0.0),
        ))
        .unwrap()
    }

    #[test]
    fn no_branching_keeps_the_count() {
        let mut pop = Population::at_point(&[0.0, 0.0], 1.0, 50.0);
        let mut rng = replica_rng(1, 0);
        let law = NoBranching { n: 50.0 };
        let mut last = 0.0;
        for _ in 0..100 {
            step_population(&mut pop, 0.01, &set(), &law, &mut rng, 1000, None).unwrap();
            assert_eq!(pop.len(), 50);
            assert!(pop.max_radius >= last);
            last = pop.max_radius;
        }
        assert!((pop.time - 1.0).abs() < 1e-12);
    }

    #[test]
    fn oversized_step_is_rejected() {
        let mut pop = Population::at_point(&[0.0, 0.0], 1.0, 100.0);
        let law = build_offspring_law(
            2.0,
            100.0,
            &CoefficientSpec::constant(1.0),
            &CoefficientSpec::constant(0.0),
            2.0,
        )
        .unwrap();
        let res = step_population(
            &mut pop,
            1e-3,
            &set(),
            &*law,
            &mut replica_rng(0, 0),
            1000,
            None,
        );
        assert!(matches!(res, Err(Error::Precondition(_))));
    }

    #[test]
    fn cap_aborts() {
        let mut pop = Population::at_point(&[0.0, 0.0], 1.0, 100.0);
        let law = build_offspring_law(
            2.0,
            100.0,
            &CoefficientSpec::constant(1.0),
            &CoefficientSpec::constant(5.0),
            0.02,
        )
        .unwrap();
        let mut rng = replica_rng(2, 0);
        let mut res = Ok(());
        for _ in 0..200 {
            res = step_population(&mut pop, 0.05, &set(), &*law, &mut rng, 150, None);
            if res.is_err() {
                break;
            }
        }
        assert!(matches!(
            res,
            Err(Error::PopulationExplosionCap { cap: 150, .. })
        ));
    }

    #[test]
    fn observer_sees_every_move() {
        let mut pop = Population::at_point(&[1.0, 0.0], 1.0, 10.0);
        let mut seen = 0;
        let mut obs = |_: &[f64], _: &[f64], var: f64, _: &mut ParticleRng| {
            assert!((var - 0.02).abs() < 1e-15);
            seen += 1;
        };
        let law = NoBranching { n: 10.0 };
        step_population(
            &mut pop,
            0.01,
            &set(),
            &law,
            &mut replica_rng(0, 0),
            100,
            Some(&mut obs),
        )
        .unwrap();
        assert_eq!(seen, 10);
    }
}
