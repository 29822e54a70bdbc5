//! JSON run configuration.
//!
//! All frequencies are in units of the trap frequency ν, angles in radians.
//! Unknown keys are rejected so that typos fail loudly instead of silently
//! falling back to defaults.

use std::f64::consts::{FRAC_PI_2, PI};
use std::path::Path;

use lamfluor::{EmissionPattern, ModelParams};
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "lowercase")]
pub enum PatternConfig {
    Isotropic,
    Dipole,
    Custom { beta: f64 },
}

impl PatternConfig {
    fn to_model(&self) -> EmissionPattern {
        match *self {
            PatternConfig::Isotropic => EmissionPattern::Isotropic,
            PatternConfig::Dipole => EmissionPattern::Dipole,
            PatternConfig::Custom { beta } => EmissionPattern::Custom { beta },
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub omega_min: f64,
    pub omega_max: f64,
    pub points: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            omega_min: -3.0,
            omega_max: 3.0,
            points: 1201,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    #[serde(default = "default_oracle_n_max")]
    pub n_max: usize,
    #[serde(default = "default_quadrature_nodes")]
    pub quadrature_nodes: usize,
}

fn default_oracle_n_max() -> usize {
    8
}

fn default_quadrature_nodes() -> usize {
    16
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            n_max: default_oracle_n_max(),
            quadrature_nodes: default_quadrature_nodes(),
        }
    }
}

fn default_phi1() -> f64 {
    0.0
}

fn default_phi2() -> f64 {
    PI
}

fn default_psi() -> f64 {
    FRAC_PI_2
}

fn default_pattern() -> PatternConfig {
    PatternConfig::Isotropic
}

fn default_n_max() -> usize {
    15
}

/// One run: physical parameters, frequency grid, oracle settings.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub omega1: f64,
    pub omega2: f64,
    pub delta: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub eta1: f64,
    pub eta2: f64,
    #[serde(default = "default_phi1")]
    pub phi1: f64,
    #[serde(default = "default_phi2")]
    pub phi2: f64,
    #[serde(default = "default_psi")]
    pub psi: f64,
    #[serde(default = "default_pattern")]
    pub pattern: PatternConfig,
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub oracle: OracleConfig,
}

impl RunConfig {
    pub fn params(&self) -> ModelParams {
        ModelParams {
            omega1: self.omega1,
            omega2: self.omega2,
            delta: self.delta,
            gamma1: self.gamma1,
            gamma2: self.gamma2,
            eta1: self.eta1,
            eta2: self.eta2,
            phi1: self.phi1,
            phi2: self.phi2,
            psi: self.psi,
            pattern: self.pattern.to_model(),
            n_max: self.n_max,
        }
    }

    pub fn oracle_params(&self) -> ModelParams {
        ModelParams {
            n_max: self.oracle.n_max,
            ..self.params()
        }
    }

    pub fn grid_points(&self) -> Vec<f64> {
        let n = self.grid.points;
        let (lo, hi) = (self.grid.omega_min, self.grid.omega_max);
        (0..n)
            .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
            .collect()
    }

    fn validate(&self) -> Result<(), CliError> {
        let ordered = self.grid.omega_min.partial_cmp(&self.grid.omega_max)
            == Some(std::cmp::Ordering::Less);
        if !ordered {
            return Err(CliError::Config(format!(
                "grid.omega_min ({}) must be < grid.omega_max ({})",
                self.grid.omega_min, self.grid.omega_max
            )));
        }
        if self.grid.points < 2 {
            return Err(CliError::Config(format!(
                "grid.points must be >= 2, got {}",
                self.grid.points
            )));
        }
        if self.oracle.n_max < 1 || self.oracle.quadrature_nodes < 1 {
            return Err(CliError::Config(
                "oracle.n_max and oracle.quadrature_nodes must be >= 1".into(),
            ));
        }
        if self.oracle.n_max > 24 {
            // the dense Liouvillian has (3(n_max+1))^4 entries
            return Err(CliError::Config(format!(
                "oracle.n_max = {} exceeds the dense-solver limit of 24",
                self.oracle.n_max
            )));
        }
        self.params()
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))
    }
}

/// Load and validate a config file.
pub fn parse_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    let cfg: RunConfig = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    cfg.validate()?;
    Ok(cfg)
}
