use super::{validate_config, validation_grid, CoefficientSpec, ModelConfig, MotionSpec};
use crate::error::{Error, Result};

/// Coordinate in which the evaluators of a [`CoefficientSet`] take their argument.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Coordinate {
    /// Radius `r` of a radial problem in (possibly fractional) dimension `dim`.
    Radial { dim: f64 },
    /// Line coordinate `z = 1/r - r` of the punctured chart.
    Line { dim: f64 },
}

/// Infimum and supremum over the validation grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bounds {
    pub inf: f64,
    pub sup: f64,
}

impl Bounds {
    fn over(values: impl Iterator<Item = f64>) -> Self {
        values.fold(
            Bounds {
                inf: f64::INFINITY,
                sup: f64::NEG_INFINITY,
            },
            |b, v| Bounds {
                inf: b.inf.min(v),
                sup: b.sup.max(v),
            },
        )
    }
}

/// Evaluators for a validated [`ModelConfig`].
#[derive(Clone, Debug)]
pub struct CoefficientSet {
    config: ModelConfig,
    coordinate: Coordinate,
    pub motion_bounds: Bounds,
    pub alpha_bounds: Bounds,
    pub beta_bounds: Bounds,
}

/// Radius corresponding to the line coordinate `z = 1/r - r`.
pub fn radius_of_line(z: f64) -> f64 {
    // Written to avoid cancellation for large positive z.
    if z > 0.0 {
        2.0 / (z + (z * z + 4.0).sqrt())
    } else {
        (-z + (z * z + 4.0).sqrt()) / 2.0
    }
}

/// Line coordinate of radius `r`.
pub fn line_of_radius(r: f64) -> f64 {
    1.0 / r - r
}

/// Coefficients `(a, b)` of `½ a u'' + b u'` at radius `r` for the chart of `½Δ` in dimension `dim`.
pub fn line_coefficients(r: f64, dim: f64) -> (f64, f64) {
    let a = (1.0 + 1.0 / (r * r)).powi(2);
    let b = (3.0 - dim) / (2.0 * r * r * r) - (dim - 1.0) / (2.0 * r);
    (a, b)
}

pub fn build_coefficients(config: &ModelConfig) -> Result<CoefficientSet> {
    let report = validate_config(config);
    if let Some(v) = report.violations.first() {
        return Err(match v.field {
            "alpha" => {
                let (lo, hi) = config.domain.radius_interval();
                validation_grid(lo, hi)
                    .into_iter()
                    .map(|r| (r, config.alpha.eval(r)))
                    .find(|(_, a)| !(*a > 0.0))
                    .map(|(radius, value)| Error::NonPositiveAlpha { radius, value })
                    .unwrap_or(Error::NonPositiveAlpha {
                        radius: 0.0,
                        value: config.alpha.limit(0.0),
                    })
            }
            "beta" => Error::UnboundedBeta(v.message.clone()),
            "domain" => Error::BadDomain(v.message.clone()),
            _ => Error::InvalidConfig(format!("{}: {}", v.field, v.message)),
        });
    }

    let coordinate = match config.motion {
        MotionSpec::PuncturedLine { dim } => Coordinate::Line { dim },
        _ => Coordinate::Radial {
            dim: config.d as f64,
        },
    };
    let (lo, hi) = config.domain.radius_interval();
    let grid = validation_grid(lo, hi);
    let mut set = CoefficientSet {
        config: config.clone(),
        coordinate,
        motion_bounds: Bounds { inf: 0.0, sup: 0.0 },
        alpha_bounds: Bounds::over(grid.iter().map(|&r| config.alpha.eval(r))),
        beta_bounds: Bounds::over(grid.iter().map(|&r| config.beta.eval(r))),
    };
    set.motion_bounds = match coordinate {
        Coordinate::Radial { .. } => Bounds::over(grid.iter().map(|&r| set.radial_motion(r))),
        Coordinate::Line { dim } => {
            Bounds::over(grid.iter().map(|&r| 0.5 * line_coefficients(r, dim).0))
        }
    };
    Ok(set)
}

impl CoefficientSet {
    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn coordinate(&self) -> Coordinate {
        self.coordinate
    }

    /// Dimension entering the radial drift.
    pub fn dim(&self) -> f64 {
        match self.coordinate {
            Coordinate::Radial { dim } | Coordinate::Line { dim } => dim,
        }
    }

    fn radius(&self, x: f64) -> f64 {
        match self.coordinate {
            Coordinate::Radial { .. } => x,
            Coordinate::Line { .. } => radius_of_line(x),
        }
    }

    fn radial_motion(&self, r: f64) -> f64 {
        match &self.config.motion {
            MotionSpec::RadialPower { m, lead, .. } => lead * (1.0 + r).powf(*m),
            MotionSpec::Table { radii, values } => interpolate(radii, values, r),
            MotionSpec::PuncturedLine { .. } => 0.5,
        }
    }

    /// Motion coefficient `A(r)` of `L = A(r) Δ`; for the line chart this is `½`,
    /// the coefficient of `½Δ` the chart was built from.
    pub fn a(&self, r: f64) -> f64 {
        self.radial_motion(r)
    }

    pub fn alpha(&self, x: f64) -> f64 {
        self.config.alpha.eval(self.radius(x))
    }

    pub fn beta(&self, x: f64) -> f64 {
        self.config.beta.eval(self.radius(x))
    }

    /// Coefficient `P` of `u''` in the one-dimensional form `P u'' + Q u'`.
    pub fn diffusion(&self, x: f64) -> f64 {
        match self.coordinate {
            Coordinate::Radial { .. } => self.radial_motion(x),
            Coordinate::Line { dim } => 0.5 * line_coefficients(radius_of_line(x), dim).0,
        }
    }

    /// Coefficient `Q` of `u'`: the radial drift `A(r)(d-1)/r`, or `b(z)` on the line.
    pub fn drift(&self, x: f64) -> f64 {
        match self.coordinate {
            Coordinate::Radial { dim } => self.radial_motion(x) * (dim - 1.0) / x,
            Coordinate::Line { dim } => line_coefficients(radius_of_line(x), dim).1,
        }
    }

    pub fn alpha_spec(&self) -> &CoefficientSpec {
        &self.config.alpha
    }

    pub fn beta_spec(&self) -> &CoefficientSpec {
        &self.config.beta
    }
}

fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> f64 {
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
