use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand_distr::{Binomial, Distribution};

use super::ParticleRng;
use crate::error::{Error, Result};
use crate::model::{validation_grid, CoefficientSpec};

/// Tail mass left beyond the explicit table of the stable family.
pub const TRUNCATION: f64 = 1e-10;
/// Hard limit on the table length of the stable family.
pub const MAX_TABLE: usize = 1 << 22;

/// Offspring distribution `{p_k(y)}` together with the branching clock.
pub trait OffspringLaw: Send + Sync + fmt::Debug {
    fn name(&self) -> &'static str;
    fn p(&self) -> f64;
    /// Particles per unit mass.
    fn scale(&self) -> f64;
    /// Exponential clock rate per particle.
    fn rate(&self) -> f64;
    /// Largest offspring number with positive weight.
    fn max_offspring(&self) -> usize;
    fn weight(&self, k: usize, r: f64) -> f64;
    /// `Φ(1 - x) - (1 - x)` at radius `r`, evaluated without cancellation.
    fn excess(&self, x: f64, r: f64) -> f64;
    fn mean(&self, r: f64) -> f64;
    fn sample(&self, r: f64, rng: &mut ParticleRng) -> usize;

    /// Total offspring of `events` independent branchings at radius `r`.
    fn sample_total(&self, r: f64, events: u64, rng: &mut ParticleRng) -> u64 {
        (0..events).map(|_| self.sample(r, rng) as u64).sum()
    }

    fn pgf(&self, s: f64, r: f64) -> f64 {
        s + self.excess(1.0 - s, r)
    }
}

/// `rate * n * (Φ(1 - λ/n) - (1 - λ/n))`, which tends to `α λ^p - β λ`.
pub fn limit_functional(law: &dyn OffspringLaw, lambda: f64, r: f64) -> f64 {
    let n = law.scale();
    law.rate() * n * law.excess(lambda / n, r)
}

/// Largest gap between [`limit_functional`] and `α λ^p - β λ` over `λ ∈ {0.5, 1, 2}`,
/// relative to `α λ^p + |β| λ`.
pub fn generating_function_gap(law: &dyn OffspringLaw, alpha: f64, beta: f64, r: f64) -> f64 {
    [0.5f64, 1.0, 2.0]
        .iter()
        .map(|&l| {
            let (a, b) = (alpha * l.powf(law.p()), beta * l);
            (limit_functional(law, l, r) - (a - b)).abs() / (a + b.abs())
        })
        .fold(0.0, f64::max)
}

fn binomial(trials: u64, prob: f64, rng: &mut ParticleRng) -> u64 {
    if trials == 0 || prob <= 0.0 {
        return 0;
    }
    if prob >= 1.0 {
        return trials;
    }
    Binomial::new(trials, prob)
        .expect("probability in (0, 1)")
        .sample(rng)
}

/// Pure motion: every branching returns the parent.
#[derive(Clone, Debug)]
pub struct NoBranching {
    pub n: f64,
}

impl OffspringLaw for NoBranching {
    fn name(&self) -> &'static str {
        "no-branching"
    }
    fn p(&self) -> f64 {
        2.0
    }
    fn scale(&self) -> f64 {
        self.n
    }
    fn rate(&self) -> f64 {
        0.0
    }
    fn max_offspring(&self) -> usize {
        1
    }
    fn weight(&self, k: usize, _r: f64) -> f64 {
        if k == 1 {
            1.0
        } else {
            0.0
        }
    }
    fn excess(&self, _x: f64, _r: f64) -> f64 {
        0.0
    }
    fn mean(&self, _r: f64) -> f64 {
        1.0
    }
    fn sample(&self, _r: f64, _rng: &mut ParticleRng) -> usize {
        1
    }
    fn sample_total(&self, _r: f64, events: u64, _rng: &mut ParticleRng) -> u64 {
        events
    }
}

/// Finite-variance law on `{0, 1, K}` with mean `1 + γ/n` and
/// `Σ (k-1)² p_k = m`, where `γ = β/c`, `m = 2α/c`. Branching rate `c n`.
/// `K = 2` is critical binary branching; smaller `c` needs a larger `K`.
#[derive(Clone, Debug)]
pub struct QuadraticLaw {
    n: f64,
    c: f64,
    k: usize,
    alpha: CoefficientSpec,
    beta: CoefficientSpec,
}

impl QuadraticLaw {
    pub fn top(&self) -> usize {
        self.k
    }

    /// `(p_0, p_1, p_K)` at radius `r`.
    pub fn probabilities(&self, r: f64) -> (f64, f64, f64) {
        let m = 2.0 * self.alpha.eval(r) / self.c;
        let g = self.beta.eval(r) / (self.c * self.n);
        let k = self.k as f64;
        let pk = (m + g) / (k * (k - 1.0));
        let p0 = (m + g) / k - g;
        (p0, 1.0 - p0 - pk, pk)
    }
}

impl OffspringLaw for QuadraticLaw {
    fn name(&self) -> &'static str {
        "quadratic"
    }
    fn p(&self) -> f64 {
        2.0
    }
    fn scale(&self) -> f64 {
        self.n
    }
    fn rate(&self) -> f64 {
        self.c * self.n
    }
    fn max_offspring(&self) -> usize {
        self.k
    }
    fn weight(&self, k: usize, r: f64) -> f64 {
        let (p0, p1, pk) = self.probabilities(r);
        match k {
            0 => p0,
            1 => p1,
            _ if k == self.k => pk,
            _ => 0.0,
        }
    }
    fn excess(&self, x: f64, r: f64) -> f64 {
        let (_, _, pk) = self.probabilities(r);
        let k = self.k as f64;
        let g = self.beta.eval(r) / (self.c * self.n);
        let curve = (k * (-x).ln_1p()).exp_m1() + k * x;
        pk * curve - g * x
    }
    fn mean(&self, r: f64) -> f64 {
        let (_, p1, pk) = self.probabilities(r);
        p1 + self.k as f64 * pk
    }
    fn sample(&self, r: f64, rng: &mut ParticleRng) -> usize {
        let (p0, p1, _) = self.probabilities(r);
        let u: f64 = rng.random();
        if u < p0 {
            0
        } else if u < p0 + p1 {
            1
        } else {
            self.k
        }
    }
    fn sample_total(&self, r: f64, events: u64, rng: &mut ParticleRng) -> u64 {
        let (p0, _, pk) = self.probabilities(r);
        let zeros = binomial(events, p0, rng);
        let rest = events - zeros;
        let tops = if p0 < 1.0 {
            binomial(rest, pk / (1.0 - p0), rng)
        } else {
            0
        };
        (rest - tops) + tops * self.k as u64
    }
}

/// Coefficients `w_k = (-1)^k binom(p, k)`, `k >= 2`, of `(1 - s)^p`, cut
/// where the remaining mass drops below [`TRUNCATION`]. The remainder is
/// put on the two integers around its conditional mean so that the mean of
/// the law is kept exactly.
///
/// Stored as tail sums `R_k = Σ_{j>k} w_j`, which keep full relative
/// precision far out in the tail; `R_1 = p - 1`.
#[derive(Debug)]
struct StableTable {
    /// `R_k` for `k = 2, ..., kmax`, then the tail beyond the first extra atom, then 0.
    survival: Vec<f64>,
    extra: [usize; 2],
    kmax: usize,
    total: f64,
    /// Mass beyond `kmax` before folding.
    folded: f64,
}

impl StableTable {
    fn new(p: f64) -> Self {
        // R_k = |b_k| with b the coefficients of (1 - s)^{p-1}, and
        // Σ_{i>=k} R_i = c_{k-1} with c the coefficients of (1 - s)^{p-2}.
        let mut tail = (p - 1.0) * (2.0 - p) / 2.0;
        let mut c_prev = 2.0 - p;
        let mut survival = Vec::new();
        let mut k = 2usize;
        loop {
            survival.push(tail);
            if tail <= TRUNCATION || k + 1 >= MAX_TABLE {
                break;
            }
            tail *= (k as f64 - (p - 1.0)) / (k as f64 + 1.0);
            c_prev *= (k as f64 + 1.0 - p) / k as f64;
            k += 1;
        }
        let kmax = k;
        // Σ_{j>k} j w_j = k R_k + Σ_{i>=k} R_i
        let centre = (kmax as f64 * tail + c_prev) / tail;
        let lo = centre.floor().max(kmax as f64 + 1.0);
        let w_hi = tail * (centre - lo);
        survival.push(w_hi);
        survival.push(0.0);
        StableTable {
            survival,
            extra: [lo as usize, lo as usize + 1],
            kmax,
            total: p - 1.0,
            folded: tail,
        }
    }

    /// `R_{i+1}` for table index `i`, with `R_1` before the table.
    fn before(&self, i: usize) -> f64 {
        if i == 0 {
            self.total
        } else {
            self.survival[i - 1]
        }
    }

    fn raw(&self, k: usize) -> f64 {
        let i = if (2..=self.kmax).contains(&k) {
            k - 2
        } else if k == self.extra[0] {
            self.kmax - 1
        } else if k == self.extra[1] {
            self.kmax
        } else {
            return 0.0;
        };
        self.before(i) - self.survival[i]
    }

    fn sample(&self, rng: &mut ParticleRng) -> usize {
        let u = rng.random::<f64>() * self.total;
        let i = self
            .survival
            .partition_point(|&s| s >= u)
            .min(self.survival.len() - 1);
        let table = self.kmax - 1;
        if i < table {
            i + 2
        } else {
            self.extra[i - table]
        }
    }
}

/// Law with generating function `s + c^{-1}[α(1-s)^p - β n^{1-p}(1-s)]`,
/// `p ∈ (1, 2)`, and branching rate `c n^{p-1}`. The weights of `k >= 2` are
/// `(α/c) w_k` with `w_k ~ k^{-1-p}`, so moments of order below `p` are finite.
#[derive(Clone, Debug)]
pub struct StableLaw {
    p: f64,
    n: f64,
    c: f64,
    alpha: CoefficientSpec,
    beta: CoefficientSpec,
    table: Arc<StableTable>,
}

impl StableLaw {
    /// `(p_0, p_1, P(k >= 2))` at radius `r`.
    pub fn probabilities(&self, r: f64) -> (f64, f64, f64) {
        let a = self.alpha.eval(r);
        let b = self.beta.eval(r) * self.n.powf(1.0 - self.p);
        let p0 = (a - b) / self.c;
        let p1 = 1.0 - (self.p * a - b) / self.c;
        (p0, p1, a * (self.p - 1.0) / self.c)
    }

    /// Mass moved by the truncation, relative to the full tail `p - 1`.
    pub fn folded_mass(&self) -> f64 {
        self.table.folded
    }

    pub fn table_len(&self) -> usize {
        self.table.kmax
    }
}

impl OffspringLaw for StableLaw {
    fn name(&self) -> &'static str {
        "stable"
    }
    fn p(&self) -> f64 {
        self.p
    }
    fn scale(&self) -> f64 {
        self.n
    }
    fn rate(&self) -> f64 {
        self.c * self.n.powf(self.p - 1.0)
    }
    fn max_offspring(&self) -> usize {
        self.table.extra[1]
    }
    fn weight(&self, k: usize, r: f64) -> f64 {
        let (p0, p1, _) = self.probabilities(r);
        match k {
            0 => p0,
            1 => p1,
            _ => self.alpha.eval(r) / self.c * self.table.raw(k),
        }
    }
    /// Closed form of the untruncated family; the truncation changes it by at most the folded mass.
    fn excess(&self, x: f64, r: f64) -> f64 {
        let a = self.alpha.eval(r);
        let b = self.beta.eval(r) * self.n.powf(1.0 - self.p);
        (a * x.powf(self.p) - b * x) / self.c
    }
    fn mean(&self, r: f64) -> f64 {
        1.0 + self.beta.eval(r) * self.n.powf(1.0 - self.p) / self.c
    }
    fn sample(&self, r: f64, rng: &mut ParticleRng) -> usize {
        let (p0, p1, _) = self.probabilities(r);
        let u: f64 = rng.random();
        if u < p0 {
            0
        } else if u < p0 + p1 {
            1
        } else {
            self.table.sample(rng)
        }
    }
    fn sample_total(&self, r: f64, events: u64, rng: &mut ParticleRng) -> u64 {
        let (p0, _, pt) = self.probabilities(r);
        let zeros = binomial(events, p0, rng);
        let rest = events - zeros;
        let big = if p0 < 1.0 {
            binomial(rest, pt / (1.0 - p0), rng)
        } else {
            0
        };
        let draws: u64 = (0..big).map(|_| self.table.sample(rng) as u64).sum();
        (rest - big) + draws
    }
}

/// Default rate constant: `p · sup α` (critical binary branching when `p = 2`).
/// For `p < 2` the one-child weight also carries `β n^{1-p}`, so the negative
/// part of `β` is added to keep it non-negative.
pub fn default_rate_constant(
    p: f64,
    n: f64,
    alpha: &CoefficientSpec,
    beta: &CoefficientSpec,
) -> f64 {
    let base = p * sup_on_grid(alpha);
    if p >= 2.0 {
        return base;
    }
    let deficit = validation_grid(0.0, f64::INFINITY)
        .into_iter()
        .chain(std::iter::once(0.0))
        .map(|r| -beta.eval(r))
        .fold(0.0, f64::max);
    if deficit.is_finite() {
        base + deficit * n.powf(1.0 - p)
    } else {
        base
    }
}

fn sup_on_grid(spec: &CoefficientSpec) -> f64 {
    validation_grid(0.0, f64::INFINITY)
        .into_iter()
        .chain(std::iter::once(0.0))
        .map(|r| spec.eval(r))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Builds the offspring law for `p ∈ (1, 2]`, scale `n` and rate constant `c`.
/// Weights are checked on the validation grid.
pub fn build_offspring_law(
    p: f64,
    n: f64,
    alpha: &CoefficientSpec,
    beta: &CoefficientSpec,
    c: f64,
) -> Result<Box<dyn OffspringLaw>> {
    if !(p > 1.0 && p <= 2.0) {
        return Err(Error::InvalidLaw(format!(
            "no particle picture for p = {p}"
        )));
    }
    if !(n >= 1.0) || !(c > 0.0) {
        return Err(Error::InvalidLaw(format!(
            "need n >= 1 and c > 0 (got n = {n}, c = {c})"
        )));
    }
    let grid: Vec<f64> = std::iter::once(0.0)
        .chain(validation_grid(0.0, f64::INFINITY))
        .collect();
    let check = |k: usize, w: f64, r: f64| -> Result<()> {
        if w < -1e-15 || !w.is_finite() {
            Err(Error::InvalidLaw(format!(
                "p_{k} = {w:e} at r = {r} (n = {n}, c = {c}); raise n or c"
            )))
        } else {
            Ok(())
        }
    };
    if p == 2.0 {
        let need = grid
            .iter()
            .map(|&r| {
                let m = 2.0 * alpha.eval(r) / c;
                let g = beta.eval(r) / (c * n);
                (m + g) / (1.0 + g)
            })
            .fold(0.0, f64::max);
        if !need.is_finite() {
            return Err(Error::InvalidLaw(
                "alpha or beta unbounded on the validation grid".into(),
            ));
        }
        let k = ((1.0 + need - 1e-9).ceil() as usize).max(2);
        let law = QuadraticLaw {
            n,
            c,
            k,
            alpha: alpha.clone(),
            beta: beta.clone(),
        };
        for &r in &grid {
            let (p0, p1, pk) = law.probabilities(r);
            check(0, p0, r)?;
            check(1, p1, r)?;
            check(k, pk, r)?;
        }
        return Ok(Box::new(law));
    }
    let law = StableLaw {
        p,
        n,
        c,
        alpha: alpha.clone(),
        beta: beta.clone(),
        table: Arc::new(StableTable::new(p)),
    };
    for &r in &grid {
        let (p0, p1, _) = law.probabilities(r);
        check(0, p0, r)?;
        check(1, p1, r)?;
    }
    Ok(Box::new(law))
}
