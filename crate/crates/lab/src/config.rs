//! Experiment configuration: a flat `key = value` file (TOML syntax) plus
//! command-line overrides. Every key is optional; each subcommand fills in
//! its own defaults.

use std::path::Path;

use serde::Deserialize;

use crate::LabError;

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Subcommand the file was written for; checked when present.
    pub command: Option<String>,

    /// Boundary map: `identity`, `linear_diag`, `radial_stretch` or `shear`.
    pub map: Option<String>,
    /// Stretch exponent of `radial_stretch`, first entry of `linear_diag`.
    pub k: Option<f64>,
    /// Shear amplitude.
    pub c: Option<f64>,
    pub quad_order: Option<usize>,
    pub seed: Option<u64>,

    // Sampling box `[−X, X]² × [s_lo, s_hi]`.
    pub half_width: Option<f64>,
    pub s_lo: Option<f64>,
    pub s_hi: Option<f64>,
    pub resolution: Option<usize>,

    // Flow schedule.
    pub t_end: Option<f64>,
    pub dt: Option<f64>,
    pub record_every: Option<usize>,

    // Heat kernel and covering.
    pub t: Option<f64>,
    pub eps: Option<f64>,
    pub times: Option<Vec<f64>>,
    pub tolerances: Option<Vec<f64>>,
    pub rho_step: Option<f64>,
    pub delta: Option<f64>,
    pub r0: Option<f64>,
    pub samples: Option<usize>,
    pub max_cylinders: Option<usize>,
    pub svg: Option<bool>,

    // Good set.
    pub heights: Option<Vec<f64>>,
    pub points: Option<usize>,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, LabError> {
        toml::from_str(text).map_err(|e| LabError::Config(e.message().to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, LabError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LabError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Rejects a file written for a different subcommand.
    pub fn expect_command(&self, name: &str) -> Result<(), LabError> {
        match &self.command {
            Some(c) if c != name => Err(LabError::Config(format!("config is for `{c}`, not `{name}`"))),
            _ => Ok(()),
        }
    }
}

pub(crate) fn positive(name: &str, value: f64) -> Result<f64, LabError> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(LabError::Config(format!("{name} must be positive, got {value}")))
    }
}
