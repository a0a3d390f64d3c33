//! Small statistics helpers for Monte Carlo estimators.

use serde::Serialize;

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959963984540054;

/// Point estimate with standard error and 95% interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub std_err: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub samples: usize,
}

impl Estimate {
    pub fn exact(value: f64, samples: usize) -> Self {
        Estimate {
            value,
            std_err: 0.0,
            ci_lo: value,
            ci_hi: value,
            samples,
        }
    }

    /// Whether `target` lies within `k` standard errors plus `slack`.
    pub fn agrees_with(&self, target: f64, k: f64, slack: f64) -> bool {
        (self.value - target).abs() <= k * self.std_err + slack
    }
}

/// Proportion with a Wilson score interval.
pub fn binomial(successes: usize, trials: usize) -> Estimate {
    if trials == 0 {
        return Estimate {
            value: f64::NAN,
            std_err: f64::NAN,
            ci_lo: 0.0,
            ci_hi: 1.0,
            samples: 0,
        };
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    Estimate {
        value: p,
        std_err: (p * (1.0 - p) / n).sqrt(),
        ci_lo: if successes == 0 {
            0.0
        } else {
            (centre - half).max(0.0)
        },
        ci_hi: if successes == trials {
            1.0
        } else {
            (centre + half).min(1.0)
        },
        samples: trials,
    }
}

/// Sample mean with a normal interval.
pub fn mean(values: &[f64]) -> Estimate {
    let n = values.len();
    if n == 0 {
        return binomial(0, 0);
    }
    let m = values.iter().sum::<f64>() / n as f64;
    let var = if n > 1 {
        values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1) as f64
    } else {
        0.0
    };
    let se = (var / n as f64).sqrt();
    Estimate {
        value: m,
        std_err: se,
        ci_lo: m - Z95 * se,
        ci_hi: m + Z95 * se,
        samples: n,
    }
}

/// Empirical quantile of sorted data (linear interpolation between order statistics).
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let i = pos.floor() as usize;
    let j = (i + 1).min(sorted.len() - 1);
    let w = pos - i as f64;
    sorted[i] * (1.0 - w) + sorted[j] * w
}

/// Least-squares slope of `y` against `x`.
pub fn slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn wilson_interval_contains_estimate() {
        let e = binomial(30, 100);
        assert_relative_eq!(e.value, 0.3);
        assert!(e.ci_lo < 0.3 && e.ci_hi > 0.3);
        assert_relative_eq!(e.ci_lo, 0.2189, epsilon = 1e-3);
        assert_relative_eq!(e.ci_hi, 0.3958, epsilon = 1e-3);
    }

    #[test]
    fn degenerate_proportions_stay_in_unit_interval() {
        let zero = binomial(0, 50);
        assert_eq!(zero.ci_lo, 0.0);
        assert!(zero.ci_hi > 0.0);
        let one = binomial(50, 50);
        assert_eq!(one.ci_hi, 1.0);
    }

    #[test]
    fn mean_and_quantiles() {
        let v = [1.0, 2.0, 3.0, 4.0];
        let e = mean(&v);
        assert_relative_eq!(e.value, 2.5);
        assert_relative_eq!(e.std_err, (5.0f64 / 12.0).sqrt(), epsilon = 1e-12);
        assert_eq!(quantile(&v, 0.0), 1.0);
        assert_eq!(quantile(&v, 1.0), 4.0);
        assert_relative_eq!(quantile(&v, 0.5), 2.5);
    }

    #[test]
    fn slope_of_a_line() {
        assert_relative_eq!(slope(&[0.0, 1.0, 2.0], &[1.0, 3.0, 5.0]), 2.0);
    }
}
