//! JSON experiment files.
//!
//! Complex numbers are `[re, im]` pairs and rates are `"p/q"` strings:
//!
//! ```json
//! {
//!   "m1": 17,
//!   "model": {
//!     "order": 2,
//!     "omega": 6.283185307179586,
//!     "components": [{ "type": "exp_velocity", "r": "1/2" }, { "type": "exp_velocity", "r": "1/3" }]
//!   },
//!   "x0": [[3.19, 3.67], [-47.46, -23.83]],
//!   "xdot0": [[0.56, 4.97], [27.85, -52.55]],
//!   "t_end": 24.0,
//!   "dt": 0.001
//! }
//! ```

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::models::GeneratingModel;
use crate::solver::{Ivp, SolverError};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed configuration: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid configuration: {0}")]
    Invalid(#[from] SolverError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EngineChoice {
    Algebraic,
    Direct,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Everything needed to reproduce one run. The run options (engine through
/// format) are defaults that command-line flags override.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub m1: usize,
    pub model: GeneratingModel,
    #[serde(default)]
    pub t0: f64,
    pub x0: Vec<Complex64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xdot0: Option<Vec<Complex64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub engine: Option<EngineChoice>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol_root: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol_period: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<OutputFormat>,
}

impl ExperimentConfig {
    /// Parses and validates.
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.ivp().validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("configuration serializes")
    }

    pub fn ivp(&self) -> Ivp {
        Ivp::new(
            self.m1,
            self.model.clone(),
            self.t0,
            self.x0.clone(),
            self.xdot0.clone(),
        )
    }
}
