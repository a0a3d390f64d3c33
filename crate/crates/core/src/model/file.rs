//! TOML configuration files with `[model]`, `[pde]`, `[particles]` and `[run]` sections.

use serde::{Deserialize, Serialize};
use std::path::Path;

use super::ModelConfig;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfigFile {
    pub model: ModelConfig,
    #[serde(default)]
    pub pde: PdeSettings,
    #[serde(default)]
    pub particles: ParticleSettings,
    #[serde(default)]
    pub run: RunSettings,
}

/// Numerical settings for the PDE classifiers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PdeSettings {
    /// Radial nodes per solve.
    pub nodes: usize,
    /// Time steps per unit horizon (upper bound on the step size).
    pub steps: usize,
    /// Ball radii for the maximal-solution ladder.
    pub radii: Vec<f64>,
    /// Probe radius and time.
    pub probe_r: f64,
    pub probe_t: f64,
    /// Inner radii of the annulus ladder for punctured problems.
    pub inner_radii: Vec<f64>,
    /// Outer radii of the annulus ladder for punctured problems.
    pub outer_radii: Vec<f64>,
}

impl Default for PdeSettings {
    fn default() -> Self {
        PdeSettings {
            nodes: 400,
            steps: 400,
            radii: vec![2.0, 4.0, 6.0, 8.0],
            probe_r: 0.0,
            probe_t: 1.0,
            inner_radii: (2..=8).map(|k| 10f64.powi(-k)).collect(),
            outer_radii: vec![4.0, 8.0],
        }
    }
}

/// Settings for the branching particle estimators.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ParticleSettings {
    /// Scale `n`: particles per unit mass.
    pub n: usize,
    pub replicas: usize,
    /// Branching rate constant; chosen from the coefficients when absent.
    pub c: Option<f64>,
    /// Time step of the Euler scheme; chosen from the branching rate when absent.
    pub dt: Option<f64>,
    /// Hard cap on the particle count.
    pub cap: usize,
}

impl Default for ParticleSettings {
    fn default() -> Self {
        ParticleSettings {
            n: 2000,
            replicas: 1000,
            c: None,
            dt: None,
            cap: 1_000_000,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunSettings {
    pub seed: u64,
    pub threads: Option<usize>,
}

pub fn parse_config_str(text: &str) -> Result<ConfigFile> {
    toml::from_str(text).map_err(|e| Error::ConfigFile(e.to_string()))
}

pub fn load_config_file(path: &Path) -> Result<ConfigFile> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::ConfigFile(format!("{}: {e}", path.display())))?;
    parse_config_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{CoefficientSpec, DomainKind, MotionSpec};

    #[test]
    fn parses_all_sections() {
        let text = r#"
            [model]
            d = 3
            p = 2.0
            motion = { kind = "radial_power", m = 1.0 }
            alpha = { kind = "stretched_exp", c1 = 1.0, c2 = 0.1, s = 1.0 }
            beta = { kind = "inverse_square", k = -0.5 }
            domain = { kind = "annulus", inner = 0.01, outer = 4.0 }

            [pde]
            nodes = 100

            [particles]
            n = 50
            c = 0.5

            [run]
            seed = 7
        "#;
        let file = parse_config_str(text).unwrap();
        assert_eq!(
            file.model.motion,
            MotionSpec::RadialPower {
                m: 1.0,
                c0: 1.0,
                lead: 1.0
            }
        );
        assert_eq!(
            file.model.alpha,
            CoefficientSpec::stretched_exp(1.0, 0.1, 1.0)
        );
        assert_eq!(
            file.model.domain,
            DomainKind::Annulus {
                inner: 0.01,
                outer: 4.0
            }
        );
        assert_eq!(file.model.horizon, 1.0);
        assert_eq!(file.pde.nodes, 100);
        assert_eq!(file.pde.steps, PdeSettings::default().steps);
        assert_eq!(file.particles.c, Some(0.5));
        assert_eq!(file.run.seed, 7);
    }

    #[test]
    fn round_trips_through_toml() {
        let file = ConfigFile {
            model: ModelConfig::punctured_brownian(3, 2.0, CoefficientSpec::inverse_square(-2.0)),
            pde: PdeSettings::default(),
            particles: ParticleSettings::default(),
            run: RunSettings::default(),
        };
        let text = toml::to_string(&file).unwrap();
        assert_eq!(parse_config_str(&text).unwrap(), file);
    }

    #[test]
    fn reports_unknown_family() {
        let text = "[model]\nd = 1\np = 2.0\nmotion = { kind = \"radial_power\", m = 0.0 }\nalpha = { kind = \"cubic\" }\nbeta = { kind = \"constant\", c = 0.0 }\n";
        assert!(matches!(parse_config_str(text), Err(Error::ConfigFile(_))));
    }
}
