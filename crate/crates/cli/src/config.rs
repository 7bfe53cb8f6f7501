//! Config resolution: a JSON or TOML file, overlaid with command-line flags,
//! checked against a typed schema, then frozen into canonical JSON whose
//! SHA-256 is the run's identity.
//!
//! Flag structs serialize to flat maps whose keys may be dotted
//! (`operator.n_modes`); unset flags serialize to `null` and are skipped.

use std::f64::consts::PI;
use std::path::Path;
use std::sync::Arc;

use memres_core::{build_operator, MaterialKernel, OperatorConfig, SpectralOperator};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub fn load_file(path: &Path) -> Result<Value, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read config {}: {e}", path.display())))?;
    let is_toml = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("toml"));
    let value: Value = if is_toml {
        let t: toml::Table = toml::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        serde_json::to_value(t).map_err(|e| CliError::config(e.to_string()))?
    } else {
        serde_json::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?
    };
    if !value.is_object() {
        return Err(CliError::config("config file must hold a table at the top level"));
    }
    Ok(value)
}

/// Merge non-null flag values into `base`, splitting dotted keys into nested tables.
pub fn overlay<T: Serialize>(base: &mut Value, flags: &T) -> Result<(), CliError> {
    let Value::Object(flat) = serde_json::to_value(flags).map_err(|e| CliError::config(e.to_string()))? else {
        return Ok(());
    };
    for (key, v) in flat {
        if v.is_null() {
            continue;
        }
        let mut slot = &mut *base;
        let mut parts = key.split('.').peekable();
        while let Some(part) = parts.next() {
            let map = slot
                .as_object_mut()
                .ok_or_else(|| CliError::config(format!("config key `{key}` collides with a non-table value")))?;
            if parts.peek().is_none() {
                map.insert(part.to_string(), v.clone());
                break;
            }
            slot = map.entry(part).or_insert_with(|| Value::Object(Map::new()));
        }
    }
    Ok(())
}

/// Fully resolved configuration of one run.
pub struct Resolved<T> {
    pub config: T,
    pub canonical: Value,
    pub hash: String,
}

pub fn resolve<T: DeserializeOwned + Serialize>(command: &str, merged: Value) -> Result<Resolved<T>, CliError> {
    let config: T = serde_json::from_value(merged).map_err(|e| CliError::config(format!("{command}: {e}")))?;
    let mut canonical = serde_json::to_value(&config).map_err(|e| CliError::config(e.to_string()))?;
    if let Value::Object(m) = &mut canonical {
        m.insert("command".into(), Value::String(command.into()));
    }
    // serde_json maps are ordered by key, so this text is canonical.
    let text = serde_json::to_string(&canonical).map_err(|e| CliError::config(e.to_string()))?;
    let hash = hex::encode(Sha256::digest(text.as_bytes()));
    Ok(Resolved { config, canonical, hash })
}

fn default_dimension() -> usize {
    1
}

fn default_length() -> f64 {
    PI
}

fn default_modes() -> usize {
    64
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorSpec {
    #[serde(default = "default_dimension")]
    pub dimension: usize,
    /// Side length; a rectangle is square.
    #[serde(default = "default_length")]
    pub length: f64,
    /// Modes per axis.
    #[serde(default = "default_modes")]
    pub n_modes: usize,
    #[serde(default)]
    pub delta: f64,
}

impl Default for OperatorSpec {
    fn default() -> Self {
        Self { dimension: default_dimension(), length: default_length(), n_modes: default_modes(), delta: 0.0 }
    }
}

impl OperatorSpec {
    pub fn build(&self) -> Result<Arc<SpectralOperator>, CliError> {
        let cfg = match self.dimension {
            1 => OperatorConfig::line(self.length, self.n_modes, self.delta),
            2 => OperatorConfig::rectangle([self.length; 2], [self.n_modes; 2], self.delta),
            d => return Err(CliError::config(format!("operator.dimension must be 1 or 2, got {d}"))),
        };
        Ok(Arc::new(build_operator(cfg)?))
    }
}

pub fn parse_kernel(literal: &str) -> Result<MaterialKernel, CliError> {
    Ok(literal.parse::<MaterialKernel>()?)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelCheckConfig {
    pub kernel: String,
    #[serde(default)]
    pub psi0: f64,
}

fn default_check_points() -> usize {
    8
}

fn default_agreement_tol() -> f64 {
    1e-5
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeConfig {
    pub kernel: String,
    pub mu: Vec<f64>,
    #[serde(rename = "T")]
    pub horizon: f64,
    pub h: f64,
    /// Grid nodes, evenly spread over (0, T], where both methods are compared.
    #[serde(default = "default_check_points")]
    pub check_points: usize,
    #[serde(default = "default_agreement_tol")]
    pub agreement_tol: f64,
}

fn default_t_min() -> f64 {
    0.05
}

fn default_t_max() -> f64 {
    0.5
}

fn default_samples() -> usize {
    13
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmoothingConfig {
    pub kernel: String,
    #[serde(default)]
    pub operator: OperatorSpec,
    #[serde(default)]
    pub gamma: f64,
    #[serde(default)]
    pub theta: f64,
    #[serde(default = "default_t_min")]
    pub t_min: f64,
    #[serde(default = "default_t_max")]
    pub t_max: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn default_one() -> f64 {
    1.0
}

fn default_rho() -> f64 {
    2.0
}

fn default_eps() -> f64 {
    0.2
}

fn default_threshold() -> f64 {
    1e8
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Tables {
    #[default]
    Auto,
    Volterra,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub kernel: String,
    #[serde(default)]
    pub operator: OperatorSpec,
    #[serde(default = "default_one")]
    pub c0: f64,
    #[serde(default = "default_rho")]
    pub rho: f64,
    #[serde(default = "default_one")]
    pub amplitude: f64,
    /// Flat index of the excited mode in the initial datum.
    #[serde(default)]
    pub mode: usize,
    #[serde(rename = "T")]
    pub horizon: f64,
    pub h: f64,
    #[serde(default = "default_eps")]
    pub eps: f64,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    #[serde(default)]
    pub small_t: bool,
    #[serde(default)]
    pub tables: Tables,
    /// Also write the raw coefficient history.
    #[serde(default)]
    pub dump: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub kernel: String,
    #[serde(default)]
    pub operator: OperatorSpec,
    #[serde(default = "default_one")]
    pub c0: f64,
    pub rho: Vec<f64>,
    /// L^q norm of the initial datum.
    pub amplitude: Vec<f64>,
    pub q: Vec<f64>,
    #[serde(default)]
    pub mode: usize,
    #[serde(rename = "T")]
    pub horizon: f64,
    pub h: f64,
    #[serde(default = "default_eps")]
    pub eps: f64,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    #[serde(default)]
    pub tables: Tables,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum App {
    Rd,
    Ns,
    Hj,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExponentsConfig {
    pub app: App,
    #[serde(rename = "N")]
    pub n: usize,
    /// Taken from `kernel` when absent.
    pub zeta: Option<f64>,
    pub kernel: Option<String>,
    pub q: Option<f64>,
    pub rho: Option<f64>,
    pub p: Option<f64>,
    pub s: Option<f64>,
}
