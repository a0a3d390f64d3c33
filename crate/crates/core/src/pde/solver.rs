use std::io::Write;

use super::grid::Grid;
use super::operator::{LineStencil, RadialFiniteVolume, SpatialOperator};
use crate::error::{Error, Result};
use crate::model::{CoefficientSet, Coordinate};

/// Smallest step relative to the horizon before a solve gives up.
const DT_FLOOR: f64 = 1e-14;
/// First step relative to the horizon; steps then grow geometrically.
const DT_START: f64 = 1e-6;
const DT_GROWTH: f64 = 1.15;
/// Values below `-NEGATIVE_TOL * max|u|` count as a sign of instability.
const NEGATIVE_TOL: f64 = 1e-10;
/// Largest relative jump of `A` between neighbouring nodes.
const MAX_COEFF_JUMP: f64 = 0.5;
const NEWTON_ITERATIONS: usize = 200;
const NEWTON_TOL: f64 = 1e-11;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Boundary {
    /// `u_r = 0` at `r = 0`.
    Symmetry,
    ZeroFlux,
    Dirichlet(f64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Boundaries {
    pub left: Boundary,
    pub right: Boundary,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveOptions {
    pub horizon: f64,
    /// Number of steps at full size; the start-up ramp adds a few dozen more.
    pub steps: usize,
    /// Output times `k * horizon / outputs`, `k = 0..=outputs`.
    pub outputs: usize,
}

impl SolveOptions {
    pub fn new(horizon: f64, steps: usize) -> Self {
        SolveOptions {
            horizon,
            steps,
            outputs: 1,
        }
    }

    pub fn outputs(mut self, outputs: usize) -> Self {
        self.outputs = outputs.max(1);
        self
    }
}

/// Space-time grid function `u(r_i, t_j)`; `values[j][i]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    pub r: Vec<f64>,
    pub times: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

impl Field {
    pub fn last(&self) -> &[f64] {
        self.values.last().unwrap()
    }

    /// Linear interpolation in space and time.
    pub fn probe(&self, x: f64, t: f64) -> f64 {
        let j = self.times.partition_point(|&s| s < t);
        if j == 0 {
            return interp(&self.r, &self.values[0], x);
        }
        if j >= self.times.len() {
            return interp(&self.r, self.last(), x);
        }
        let (t0, t1) = (self.times[j - 1], self.times[j]);
        let w = (t - t0) / (t1 - t0);
        (1.0 - w) * interp(&self.r, &self.values[j - 1], x)
            + w * interp(&self.r, &self.values[j], x)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["r", "t", "u"])?;
        for (t, row) in self.times.iter().zip(&self.values) {
            for (r, u) in self.r.iter().zip(row) {
                w.write_record([r.to_string(), t.to_string(), u.to_string()])?;
            }
        }
        w.flush()
    }
}

pub(crate) fn interp(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    if x <= xs[0] {
        return ys[0];
    }
    let last = xs.len() - 1;
    if x >= xs[last] {
        return ys[last];
    }
    let i = xs.partition_point(|&v| v <= x) - 1;
    let w = (x - xs[i]) / (xs[i + 1] - xs[i]);
    ys[i] * (1.0 - w) + ys[i + 1] * w
}

/// Solves `A x = rhs` for tridiagonal `A`; all slices have the same length.
pub(crate) fn thomas(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &mut [f64]) {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut denom = diag[0];
    c[0] = upper[0] / denom;
    rhs[0] /= denom;
    for i in 1..n {
        denom = diag[i] - lower[i] * c[i - 1];
        c[i] = upper[i] / denom;
        rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / denom;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= c[i] * rhs[i + 1];
    }
}

/// Spatial operator matching the coordinate of `set`.
pub fn operator_for(set: &CoefficientSet, grid: &Grid) -> Box<dyn SpatialOperator> {
    match set.coordinate() {
        Coordinate::Radial { dim } => {
            let s = set.clone();
            Box::new(RadialFiniteVolume::new(grid.clone(), move |r| s.a(r), dim))
        }
        Coordinate::Line { .. } => {
            let (sp, sq) = (set.clone(), set.clone());
            Box::new(LineStencil::new(
                grid.clone(),
                move |z| sp.diffusion(z),
                move |z| sq.drift(z),
            ))
        }
    }
}

/// Implicit stepper for `u_t = L u + β u - α u^p`.
///
/// Each step is backward Euler in `L u - β⁻ u - α u^p` with the growth `β⁺ u`
/// taken from the previous step, solved by Newton. Every Newton matrix is an
/// M-matrix with a non-negative right-hand side, and convexity of `u^p` makes
/// the iterates decrease monotonically after the first, so they stay non-negative.
pub struct Stepper<'a> {
    op: &'a dyn SpatialOperator,
    alpha: Vec<f64>,
    beta: Vec<f64>,
    p: f64,
    bc: Boundaries,
}

impl<'a> Stepper<'a> {
    pub fn new(op: &'a dyn SpatialOperator, set: &CoefficientSet, bc: Boundaries) -> Self {
        let nodes = &op.grid().nodes;
        Stepper {
            op,
            alpha: nodes.iter().map(|&x| set.alpha(x)).collect(),
            beta: nodes.iter().map(|&x| set.beta(x)).collect(),
            p: set.config().p,
            bc,
        }
    }

    /// One backward-Euler step; `None` if Newton does not converge.
    fn step(&self, u_old: &[f64], dt: f64) -> Option<Vec<f64>> {
        let n = u_old.len();
        let p = self.p;
        let (mut lo, mut di, mut up) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
        let mut rhs = vec![0.0; n];
        let mut u = u_old.to_vec();
        for _ in 0..NEWTON_ITERATIONS {
            for i in 0..n {
                let (l, d, r) = self.op.row(i);
                let (a, b) = (self.alpha[i], self.beta[i]);
                let upm1 = u[i].powf(p - 1.0);
                lo[i] = -l;
                up[i] = -r;
                di[i] = 1.0 / dt - d + (-b).max(0.0) + p * a * upm1;
                rhs[i] = u_old[i] * (1.0 / dt + b.max(0.0)) + (p - 1.0) * a * upm1 * u[i];
            }
            for (end, bc) in [(0, self.bc.left), (n - 1, self.bc.right)] {
                if let Boundary::Dirichlet(v) = bc {
                    lo[end] = 0.0;
                    up[end] = 0.0;
                    di[end] = 1.0;
                    rhs[end] = v;
                }
            }
            thomas(&lo, &di, &up, &mut rhs);
            let converged = rhs.iter().zip(&u).all(|(new, old)| {
                (new - old).abs() <= NEWTON_TOL * new.abs().max(old.abs()) + 1e-300
            });
            std::mem::swap(&mut u, &mut rhs);
            if !u.iter().all(|v| v.is_finite()) {
                return None;
            }
            if converged {
                return Some(u);
            }
        }
        None
    }

    /// Applies Dirichlet data to `u` in place.
    fn impose(&self, u: &mut [f64]) {
        let n = u.len();
        if let Boundary::Dirichlet(v) = self.bc.left {
            u[0] = v;
        }
        if let Boundary::Dirichlet(v) = self.bc.right {
            u[n - 1] = v;
        }
    }
}

/// Solves the semilinear problem from `initial` on `grid` up to `opts.horizon`.
pub fn solve_semilinear(
    set: &CoefficientSet,
    grid: &Grid,
    initial: &dyn Fn(f64) -> f64,
    bc: Boundaries,
    opts: &SolveOptions,
) -> Result<Field> {
    if !(opts.horizon > 0.0) || opts.steps == 0 {
        return Err(Error::Precondition(
            "horizon and steps must be positive".into(),
        ));
    }
    if bc.left == Boundary::Symmetry && grid.lo() != 0.0 {
        return Err(Error::Precondition(
            "symmetry condition needs the origin as left end".into(),
        ));
    }
    check_resolution(set, grid)?;
    let op = operator_for(set, grid);
    let stepper = Stepper::new(op.as_ref(), set, bc);
    let mut u: Vec<f64> = grid.nodes.iter().map(|&x| initial(x)).collect();
    if let Some((i, v)) = u.iter().enumerate().find(|(_, v)| !(**v >= 0.0)) {
        return Err(Error::Precondition(format!(
            "initial data must be non-negative, f({}) = {v}",
            grid.nodes[i]
        )));
    }
    stepper.impose(&mut u);
    march(&stepper, u, grid, opts)
}

fn check_resolution(set: &CoefficientSet, grid: &Grid) -> Result<()> {
    if let Coordinate::Radial { .. } = set.coordinate() {
        for w in grid.nodes.windows(2) {
            let (a0, a1) = (set.a(w[0]), set.a(w[1]));
            if (a1 - a0).abs() > MAX_COEFF_JUMP * a0.min(a1) {
                return Err(Error::Precondition(format!(
                    "grid too coarse for the motion coefficient between r = {} and r = {}",
                    w[0], w[1]
                )));
            }
        }
    }
    Ok(())
}

/// Time loop with a geometric start-up ramp and step halving on failure.
pub(crate) fn march(
    stepper: &Stepper,
    mut u: Vec<f64>,
    grid: &Grid,
    opts: &SolveOptions,
) -> Result<Field> {
    let horizon = opts.horizon;
    let dt_max = horizon / opts.steps as f64;
    let mut dt = (DT_START * horizon).min(dt_max);
    let outputs: Vec<f64> = (1..=opts.outputs)
        .map(|k| horizon * k as f64 / opts.outputs as f64)
        .collect();
    let mut times = vec![0.0];
    let mut values = vec![u.clone()];
    let mut t = 0.0;
    for &target in &outputs {
        while t < target * (1.0 - 1e-12) {
            let h = dt.min(target - t);
            let mut trial = h;
            loop {
                match stepper.step(&u, trial) {
                    Some(next) => {
                        let scale = next.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                        if let Some((node, &value)) = next
                            .iter()
                            .enumerate()
                            .find(|(_, v)| **v < -NEGATIVE_TOL * scale)
                        {
                            return Err(Error::NegativeValue { node, value });
                        }
                        u = next.into_iter().map(|v| v.max(0.0)).collect();
                        t += trial;
                        break;
                    }
                    None => {
                        trial *= 0.5;
                        if trial < DT_FLOOR * horizon {
                            return Err(Error::NonConvergence { time: t, dt: trial });
                        }
                    }
                }
            }
            if trial == h {
                dt = (dt * DT_GROWTH).min(dt_max);
            }
        }
        t = target;
        times.push(t);
        values.push(u.clone());
    }
    Ok(Field {
        r: grid.nodes.clone(),
        times,
        values,
    })
}
