use crate::error::{Error, Result};
use crate::model::{line_coefficients, radius_of_line, DomainKind, ModelConfig, MotionSpec};

/// The punctured radial problem for `½Δ` written in `z = 1/r - r`, which maps
/// `(0, ∞)` onto the whole line with the puncture at `z = +∞`.
#[derive(Clone, Debug, PartialEq)]
pub struct LineChart {
    pub config: ModelConfig,
    pub dim: f64,
}

impl LineChart {
    /// `a(z)` of `½ a u'' + b u'`.
    pub fn a(&self, z: f64) -> f64 {
        line_coefficients(radius_of_line(z), self.dim).0
    }

    pub fn b(&self, z: f64) -> f64 {
        line_coefficients(radius_of_line(z), self.dim).1
    }

    /// `β` as a function of `z`.
    pub fn beta(&self, z: f64) -> f64 {
        self.config.beta.eval(radius_of_line(z))
    }
}

/// `4c / ((z² + 4)^{1/2} - z)²`, the line form of `c / r²`.
pub fn inverse_square_on_line(z: f64, c: f64) -> f64 {
    let w = if z > 0.0 {
        4.0 / ((z * z + 4.0).sqrt() + z)
    } else {
        (z * z + 4.0).sqrt() - z
    };
    4.0 * c / (w * w)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineAsymptotics {
    /// `a(z)/z⁴` at large positive `z`.
    pub a_over_z4: f64,
    /// `b(z)/z³` at large positive `z`, to compare with `(3 - d)/2`.
    pub b_over_z3: f64,
    /// `a(z)` and `b(z)` at large negative `z`.
    pub a_far: f64,
    pub b_far: f64,
}

pub fn line_asymptotics(chart: &LineChart, z: f64) -> LineAsymptotics {
    LineAsymptotics {
        a_over_z4: chart.a(z) / z.powi(4),
        b_over_z3: chart.b(z) / z.powi(3),
        a_far: chart.a(-z),
        b_far: chart.b(-z),
    }
}

/// Rewrites a punctured `½Δ` config on the line. The result uses the
/// `PuncturedLine` motion and can be fed to the same solvers.
pub fn change_of_variables_line(config: &ModelConfig) -> Result<LineChart> {
    if config.d < 2 {
        return Err(Error::DimensionTooSmall(config.d));
    }
    if config.domain != DomainKind::Punctured || config.motion != MotionSpec::half_radial_power(0.0)
    {
        return Err(Error::Precondition(
            "the line chart is defined for the punctured problem with motion ½Δ".into(),
        ));
    }
    let dim = config.d as f64;
    let chart = LineChart {
        config: ModelConfig {
            motion: MotionSpec::PuncturedLine { dim },
            domain: DomainKind::FullSpace,
            ..config.clone()
        },
        dim,
    };
    let asym = line_asymptotics(&chart, 1e4);
    let expected = (3.0 - dim) / 2.0;
    if (asym.a_over_z4 - 1.0).abs() > 1e-3
        || (asym.b_over_z3 - expected).abs() > 1e-3
        || (asym.a_far - 1.0).abs() > 1e-3
        || asym.b_far.abs() > 1e-3
    {
        return Err(Error::InvalidConfig(format!(
            "line chart asymptotics off: {asym:?}"
        )));
    }
    Ok(chart)
}
