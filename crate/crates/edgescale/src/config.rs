//! Per-command configuration: a JSON document whose keys mirror the CLI
//! flags, with flags taking precedence over the file.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::RunError;

/// Execution settings shared by all commands.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub seed: u64,
    pub workers: usize,
    pub out: PathBuf,
}

const SETTING_KEYS: [&str; 3] = ["seed", "workers", "out"];

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// Reads a config file. A `summary.json` written by an earlier run is also
/// accepted: its embedded `config` is used, provided it belongs to `command`.
pub fn load_file(path: &Path, command: &str) -> Result<Map<String, Value>, RunError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| RunError::config(format!("cannot read {}: {e}", path.display())))?;
    let value: Value = serde_json::from_str(&text)
        .map_err(|e| RunError::config(format!("{} is not valid JSON: {e}", path.display())))?;
    let Value::Object(mut map) = value else {
        return Err(RunError::config("config file must hold a JSON object"));
    };
    if let (Some(Value::String(cmd)), Some(Value::Object(_))) = (map.get("command"), map.get("config")) {
        if cmd != command {
            return Err(RunError::config(format!(
                "{} is a `{cmd}` summary, not a `{command}` config",
                path.display()
            )));
        }
        if let Some(Value::Object(inner)) = map.remove("config") {
            return Ok(inner);
        }
    }
    Ok(map)
}

/// Merges `overrides` over `file`, splits off the execution settings and
/// deserializes the rest into the command config.
pub fn resolve<T: DeserializeOwned>(
    mut file: Map<String, Value>,
    overrides: Map<String, Value>,
) -> Result<(T, Settings), RunError> {
    file.extend(overrides);
    let seed = match file.remove("seed") {
        None => 0,
        Some(v) => v
            .as_u64()
            .ok_or_else(|| RunError::config(format!("seed must be an unsigned integer, got {v}")))?,
    };
    let workers = match file.remove("workers") {
        None => default_workers(),
        Some(v) => v
            .as_u64()
            .and_then(|w| usize::try_from(w).ok())
            .ok_or_else(|| RunError::config(format!("workers must be a positive integer, got {v}")))?,
    };
    let out = match file.remove("out") {
        None => PathBuf::from("out"),
        Some(Value::String(s)) => PathBuf::from(s),
        Some(v) => return Err(RunError::config(format!("out must be a path string, got {v}"))),
    };
    debug_assert!(SETTING_KEYS.iter().all(|k| !file.contains_key(*k)));
    let config = serde_json::from_value(Value::Object(file))
        .map_err(|e| RunError::config(e.to_string()))?;
    Ok((config, Settings { seed, workers, out }))
}

/// The config as embedded in a summary: every command key plus the seed.
pub fn embed<T: Serialize>(config: &T, seed: u64) -> Value {
    let mut value = serde_json::to_value(config).unwrap_or(Value::Null);
    if let Value::Object(map) = &mut value {
        map.insert("seed".into(), seed.into());
    }
    value
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumConfig {
    pub n: usize,
    pub sigma: f64,
    pub alpha: f64,
    pub family: String,
    pub replicas: usize,
    /// Number of largest eigenvalues kept per replica.
    pub k: usize,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        Self {
            n: 2000,
            sigma: 1.0,
            alpha: 1.5,
            family: "gaussian".into(),
            replicas: 1000,
            k: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContinuumConfig {
    pub sigma: f64,
    pub k: usize,
    /// `discretize`, `riccati` or `both`.
    pub method: String,
    pub replicas: usize,
    /// Noise cells per unit length.
    pub grid: usize,
    /// Eigenvalue bracket width.
    pub tol: f64,
    /// Largest allowed gap between the methods on one path (`both` only).
    pub agreement_tol: f64,
    /// Fraction of paths that must agree within `agreement_tol`.
    pub agreement_fraction: f64,
}

impl Default for ContinuumConfig {
    fn default() -> Self {
        Self {
            sigma: 1.0,
            k: 3,
            method: "both".into(),
            replicas: 200,
            grid: 8192,
            tol: 1e-5,
            agreement_tol: 0.1,
            agreement_fraction: 0.95,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TraceConfig {
    pub n: usize,
    pub sigma: f64,
    pub t: f64,
    pub family: String,
    /// Independent potential draws.
    pub realizations: usize,
    pub x_grid: usize,
    /// Bridges per quadrature point.
    pub replicas: usize,
    pub steps: usize,
    pub control_variate: bool,
    pub crossing_correction: bool,
    /// Smaller matrix size whose median discrepancy must exceed the one at `n`.
    pub trend_n: Option<usize>,
    /// Largest allowed `|eigen_sum - trace| / stderr` per realization.
    pub max_z: f64,
}

impl Default for TraceConfig {
    fn default() -> Self {
        Self {
            n: 2000,
            sigma: 1.0,
            t: 1.0,
            family: "gaussian".into(),
            realizations: 50,
            x_grid: 32,
            replicas: 2048,
            steps: 2048,
            control_variate: true,
            crossing_correction: true,
            trend_n: None,
            max_z: 5.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThetaConfig {
    pub t_values: Vec<f64>,
    pub replicas: usize,
    pub steps: usize,
    pub crossing_correction: bool,
    pub max_z: f64,
}

impl Default for ThetaConfig {
    fn default() -> Self {
        Self {
            t_values: vec![0.5, 1.0],
            replicas: 100_000,
            steps: 2048,
            crossing_correction: true,
            max_z: 3.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TwConfig {
    pub beta: f64,
    pub n: usize,
    /// Scaling index of the shifted-mean matrix.
    pub m: usize,
    pub replicas: usize,
    pub sao_length: f64,
    /// SAO grid points per unit length.
    pub sao_m: usize,
    pub ks_max: f64,
    /// Allowed error of the zero-noise SAO ground state.
    pub airy_tol: f64,
}

impl Default for TwConfig {
    fn default() -> Self {
        Self {
            beta: 2.0,
            n: 8000,
            m: 20,
            replicas: 3000,
            sao_length: 10.0,
            sao_m: 400,
            ks_max: 0.07,
            airy_tol: 0.02,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TailsConfig {
    pub sigma: f64,
    /// `right` for `P(-Λ₀ > a)`, `left` for `P(-Λ₀ < -a)`.
    pub side: String,
    pub a_grid: Vec<f64>,
    pub replicas: usize,
    pub grid: usize,
    /// Power of `a` in the fit; defaults to 3/2 (right) or 2 (left).
    pub exponent: Option<f64>,
    pub coefficient_min: Option<f64>,
    pub coefficient_max: Option<f64>,
}

impl Default for TailsConfig {
    fn default() -> Self {
        Self {
            sigma: 1.0,
            side: "right".into(),
            a_grid: vec![3.0, 4.5, 6.0],
            replicas: 100_000,
            grid: 2048,
            exponent: None,
            coefficient_min: None,
            coefficient_max: None,
        }
    }
}
