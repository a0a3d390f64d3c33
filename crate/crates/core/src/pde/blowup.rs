use super::grid::{Grid, DEFAULT_RATIO};
use super::solver::{march, operator_for, Boundaries, Boundary, Field, SolveOptions, Stepper};
use crate::error::{Error, Result};
use crate::model::{
    build_coefficients, line_of_radius, radius_of_line, CoefficientSet, Coordinate, ModelConfig,
};

/// Relative change between successive levels accepted as saturation.
pub const SATURATION_TOL: f64 = 1e-3;
/// Values below this are compared absolutely.
const SATURATION_FLOOR: f64 = 1e-14;
const MONOTONE_TOL: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Region {
    Ball { radius: f64 },
    Annulus { inner: f64, outer: f64 },
}

impl Region {
    /// Interior radii at which saturation is checked.
    fn probes(&self) -> Vec<f64> {
        match *self {
            Region::Ball { radius } => vec![0.0, 0.25 * radius, 0.5 * radius, 0.75 * radius],
            Region::Annulus { inner, outer } => vec![
                (inner * outer).sqrt(),
                0.25 * outer,
                0.5 * outer,
                0.75 * outer,
            ],
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Discretisation {
    /// Cells across the region at bulk spacing.
    pub bulk_cells: usize,
    pub steps: usize,
    /// Growth ratio of the boundary clustering.
    pub ratio: f64,
    pub outputs: usize,
}

impl Default for Discretisation {
    fn default() -> Self {
        Discretisation {
            bulk_cells: 400,
            steps: 400,
            ratio: DEFAULT_RATIO,
            outputs: 1,
        }
    }
}

/// Blow-up boundary problem on a ball or annulus, realised by a ladder of
/// finite boundary values `level * scale`, where `scale` is the natural size
/// of a solution near that boundary.
#[derive(Clone, Debug, PartialEq)]
pub struct BlowupProblem {
    pub config: ModelConfig,
    pub region: Region,
    /// Strictly increasing multipliers, normally powers of ten.
    pub levels: Vec<f64>,
    /// Constant initial data.
    pub initial: f64,
    pub disc: Discretisation,
}

impl BlowupProblem {
    pub fn new(config: ModelConfig, region: Region) -> Self {
        let top = (16.0 / (config.p - 1.0)).ceil().min(60.0) as i32;
        BlowupProblem {
            config,
            region,
            levels: (0..=top).map(|k| 10f64.powi(k)).collect(),
            initial: 0.0,
            disc: Discretisation::default(),
        }
    }

    pub fn with_disc(mut self, disc: Discretisation) -> Self {
        self.disc = disc;
        self
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LevelRecord {
    pub level: f64,
    pub probe_values: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct BlowupSolution {
    /// Field in the chart coordinate of the config (radius, or `z` for the line chart).
    pub field: Field,
    pub coordinate: Coordinate,
    pub ladder: Vec<LevelRecord>,
    /// Accepted level multiplier.
    pub level: f64,
    /// Probe values non-decreasing along the ladder.
    pub monotone_in_level: bool,
}

impl BlowupSolution {
    /// `u(r, t)` at radius `r`.
    pub fn at(&self, r: f64, t: f64) -> f64 {
        match self.coordinate {
            Coordinate::Radial { .. } => self.field.probe(r, t),
            Coordinate::Line { .. } => self.field.probe(line_of_radius(r), t),
        }
    }

    /// Radii of the field nodes.
    pub fn radii(&self) -> Vec<f64> {
        match self.coordinate {
            Coordinate::Radial { .. } => self.field.r.clone(),
            Coordinate::Line { .. } => self.field.r.iter().map(|&z| radius_of_line(z)).collect(),
        }
    }
}

/// Size of solutions next to a blow-up boundary at radius `rb` for a region of width `size`:
/// the larger of the space-free blow-up solution and the stationary boundary layer.
fn layer_scale(set: &CoefficientSet, alpha_min: f64, rb: f64, size: f64) -> f64 {
    let cfg = set.config();
    let p = cfg.p;
    let ode = ((p - 1.0) * alpha_min * cfg.horizon).powf(-1.0 / (p - 1.0));
    let (a, alpha) = (set.a(rb), cfg.alpha.eval(rb));
    let stat = (2.0 * (p + 1.0) * a / ((p - 1.0).powi(2) * alpha)).powf(1.0 / (p - 1.0))
        * size.powf(-2.0 / (p - 1.0));
    ode.max(stat)
}

/// Width of the boundary layer of a solution with boundary value `level * scale`.
fn layer_width(p: f64, size: f64, level: f64) -> f64 {
    size * level.powf(-(p - 1.0) / 2.0)
}

pub fn solve_blowup(problem: &BlowupProblem) -> Result<BlowupSolution> {
    let levels = &problem.levels;
    if levels.is_empty() || levels.windows(2).any(|w| !(w[1] > w[0])) || levels[0] <= 0.0 {
        return Err(Error::Precondition(
            "boundary levels must be positive and strictly increasing".into(),
        ));
    }
    let set = build_coefficients(&problem.config)?;
    let p = problem.config.p;
    let disc = &problem.disc;
    let top = *levels.last().unwrap();

    let (lo, hi, inner_size, outer_size) = match problem.region {
        Region::Ball { radius } if radius > 0.0 => (0.0, radius, None, radius),
        Region::Annulus { inner, outer } if inner > 0.0 && outer > inner => {
            (inner, outer, Some(inner), outer - inner)
        }
        r => return Err(Error::Precondition(format!("invalid region {r:?}"))),
    };
    let fine = |size: f64| 0.1 * layer_width(p, size, top);
    let radial = Grid::clustered(
        lo,
        hi,
        (hi - lo) / disc.bulk_cells as f64,
        inner_size.map(fine),
        Some(fine(outer_size.min(hi - lo))),
        disc.ratio,
    );
    let alpha_min = radial
        .nodes
        .iter()
        .map(|&r| problem.config.alpha.eval(r))
        .fold(f64::INFINITY, f64::min);
    if !(alpha_min > 0.0) {
        return Err(Error::NonPositiveAlpha {
            radius: hi,
            value: alpha_min,
        });
    }
    let outer_scale = layer_scale(&set, alpha_min, hi, outer_size);
    let inner_scale = inner_size.map(|s| layer_scale(&set, alpha_min, lo, s));

    let coordinate = set.coordinate();
    let (grid, to_chart): (Grid, Box<dyn Fn(f64) -> f64>) = match coordinate {
        Coordinate::Radial { .. } => (radial, Box::new(|r| r)),
        Coordinate::Line { .. } => {
            if inner_size.is_none() {
                return Err(Error::Precondition(
                    "the line chart needs an annulus".into(),
                ));
            }
            let mut z: Vec<f64> = radial.nodes.iter().map(|&r| line_of_radius(r)).collect();
            z.reverse();
            (Grid::new(z)?, Box::new(line_of_radius))
        }
    };
    let probes: Vec<f64> = problem.region.probes().into_iter().map(to_chart).collect();
    let op = operator_for(&set, &grid);
    let opts = SolveOptions::new(problem.config.horizon, disc.steps).outputs(disc.outputs);

    let mut ladder: Vec<LevelRecord> = Vec::new();
    let mut last_field: Option<Field> = None;
    let mut last_change = f64::INFINITY;
    for &level in levels {
        let outer = Boundary::Dirichlet(level * outer_scale);
        let inner = inner_scale.map(|s| Boundary::Dirichlet(level * s));
        let bc = match (coordinate, inner) {
            (Coordinate::Radial { .. }, None) => Boundaries {
                left: Boundary::Symmetry,
                right: outer,
            },
            (Coordinate::Radial { .. }, Some(inner)) => Boundaries {
                left: inner,
                right: outer,
            },
            // z increases toward the puncture.
            (Coordinate::Line { .. }, Some(inner)) => Boundaries {
                left: outer,
                right: inner,
            },
            (Coordinate::Line { .. }, None) => unreachable!(),
        };
        let stepper = Stepper::new(op.as_ref(), &set, bc);
        let mut u0 = vec![problem.initial; grid.len()];
        if let Boundary::Dirichlet(v) = bc.left {
            u0[0] = v;
        }
        if let Boundary::Dirichlet(v) = bc.right {
            u0[grid.len() - 1] = v;
        }
        let field = march(&stepper, u0, &grid, &opts)?;
        let probe_values: Vec<f64> = field
            .times
            .iter()
            .skip(1)
            .flat_map(|&t| probes.iter().map(move |&x| (x, t)))
            .map(|(x, t)| field.probe(x, t))
            .collect();
        if let Some(prev) = ladder.last() {
            last_change = prev
                .probe_values
                .iter()
                .zip(&probe_values)
                .map(|(a, b)| {
                    let diff = (b - a).abs();
                    if a.abs().max(b.abs()) < SATURATION_FLOOR {
                        0.0
                    } else {
                        diff / a.abs().max(b.abs())
                    }
                })
                .fold(0.0, f64::max);
        }
        ladder.push(LevelRecord {
            level,
            probe_values,
        });
        last_field = Some(field);
        if last_change < SATURATION_TOL {
            break;
        }
    }
    if !(last_change < SATURATION_TOL) {
        return Err(Error::NoSaturation { last_change });
    }
    let monotone_in_level = ladder.windows(2).all(|w| {
        w[0].probe_values
            .iter()
            .zip(&w[1].probe_values)
            .all(|(a, b)| *b >= a * (1.0 - MONOTONE_TOL) - SATURATION_FLOOR)
    });
    Ok(BlowupSolution {
        field: last_field.unwrap(),
        coordinate,
        level: ladder.last().unwrap().level,
        ladder,
        monotone_in_level,
    })
}

/// `u_m` on the ball of radius `radius` with default discretisation.
pub fn solve_blowup_ball(
    config: &ModelConfig,
    radius: f64,
    disc: &Discretisation,
) -> Result<BlowupSolution> {
    solve_blowup(
        &BlowupProblem::new(config.clone(), Region::Ball { radius }).with_disc(disc.clone()),
    )
}

/// Blow-up at both ends of the annulus `(inner, outer)`.
pub fn solve_blowup_annulus(
    config: &ModelConfig,
    inner: f64,
    outer: f64,
    disc: &Discretisation,
) -> Result<BlowupSolution> {
    solve_blowup(
        &BlowupProblem::new(config.clone(), Region::Annulus { inner, outer })
            .with_disc(disc.clone()),
    )
}
