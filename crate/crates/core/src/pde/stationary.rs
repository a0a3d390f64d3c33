use super::grid::Grid;
use crate::error::Result;
use crate::model::{build_coefficients, CoefficientSpec, ModelConfig};

/// `W(r) = c r^{-e}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StationaryCandidate {
    pub coefficient: f64,
    pub exponent: f64,
}

impl StationaryCandidate {
    /// `κ^{1/(p-1)} r^{-2/(p-1)}`, stationary for `½Δ` with `β = (β0 + κ)/r²`, `α = 1`.
    pub fn singular(kappa: f64, p: f64) -> Self {
        StationaryCandidate {
            coefficient: kappa.powf(1.0 / (p - 1.0)),
            exponent: 2.0 / (p - 1.0),
        }
    }

    pub fn scaled(self, factor: f64) -> Self {
        StationaryCandidate {
            coefficient: self.coefficient * factor,
            ..self
        }
    }

    /// `(W, W', W'')` at `r`.
    pub fn eval(&self, r: f64) -> (f64, f64, f64) {
        let e = self.exponent;
        let w = self.coefficient * r.powf(-e);
        (w, -e * w / r, e * (e + 1.0) * w / (r * r))
    }
}

/// Largest relative residual of `A(W'' + (d-1)/r W') + β W - α W^p` over the grid,
/// each node normalised by its largest term.
///
/// `β` is only evaluated pointwise, so it may be unbounded (as `κ/r²` is when `β0 = 0`).
pub fn stationary_residual(
    candidate: &StationaryCandidate,
    config: &ModelConfig,
    grid: &Grid,
) -> Result<f64> {
    let set = build_coefficients(&config.with_beta(CoefficientSpec::constant(0.0)))?;
    let dm1 = set.dim() - 1.0;
    let p = config.p;
    Ok(grid
        .nodes
        .iter()
        .map(|&r| {
            let (w, w1, w2) = candidate.eval(r);
            let a = set.a(r);
            let terms = [
                a * w2,
                a * dm1 / r * w1,
                config.beta.eval(r) * w,
                -config.alpha.eval(r) * w.powf(p),
            ];
            let sum: f64 = terms.iter().sum();
            let scale = terms.iter().fold(0.0f64, |m, t| m.max(t.abs()));
            if scale == 0.0 {
                0.0
            } else {
                sum.abs() / scale
            }
        })
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::theory::beta0;

    #[test]
    fn inverse_square_in_three_dimensions() {
        let cfg = ModelConfig::punctured_brownian(3, 2.0, CoefficientSpec::constant(0.0));
        let grid = Grid::uniform(0.1, 10.0, 200);
        let w = StationaryCandidate {
            coefficient: 1.0,
            exponent: 2.0,
        };
        assert!(stationary_residual(&w, &cfg, &grid).unwrap() < 1e-14);
        let off = stationary_residual(&w.scaled(1.1), &cfg, &grid).unwrap();
        assert!(off > 0.01, "{off}");
    }

    #[test]
    fn singular_solution_with_inverse_square_beta() {
        let (d, p, kappa) = (3, 1.5, 0.5);
        let k = beta0(d as f64, p) + kappa;
        let cfg = ModelConfig::punctured_brownian(d, p, CoefficientSpec::inverse_square(k));
        let grid = Grid::uniform(0.1, 10.0, 100);
        let res =
            stationary_residual(&StationaryCandidate::singular(kappa, p), &cfg, &grid).unwrap();
        assert!(res < 1e-12, "{res}");
    }
}
