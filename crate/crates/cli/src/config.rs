//! Run configuration: command-line flags layered over an optional JSON file.

use anyhow::{bail, Context, Result};
use clap::ValueEnum;
use rqi_core::{CostSpec, SpectralConfig};
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CostName {
    Unit,
    Chi,
    Binlen,
}

/// Values a configuration file may set; flags given on the command line win.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub threads: Option<usize>,
    pub format: Option<Format>,
    pub out: Option<String>,
    pub n: Option<f64>,
    pub n_grid: Option<Vec<f64>>,
    pub cost: Option<CostName>,
    pub digit: Option<u64>,
    pub w_grid: Option<Vec<f64>>,
    pub order: Option<usize>,
    pub digit_truncation: Option<u64>,
    pub tail_order: Option<usize>,
    pub digit_cap: Option<u64>,
    pub m_grid: Option<Vec<u64>>,
    pub k_max: Option<usize>,
    pub s_grid: Option<Vec<f64>>,
    pub cutoff: Option<u64>,
}

/// A configuration problem found before any computation; reported as a usage error.
#[derive(Debug, thiserror::Error)]
#[error("invalid configuration at {path}: {message}")]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError {
            path: path.into(),
            message: message.into(),
        }
    }
}

pub fn load(path: &Path) -> Result<FileConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let at = e.path().to_string();
        ConfigError::new(if at == "." { "$".to_string() } else { format!("$.{at}") }, e.inner().to_string())
            .into()
    })
}

pub fn cost_spec(name: CostName, digit: Option<u64>) -> Result<CostSpec> {
    Ok(match name {
        CostName::Unit => CostSpec::unit(),
        CostName::Binlen => CostSpec::binary_length(),
        CostName::Chi => {
            let Some(n) = digit else {
                return Err(ConfigError::new("$.digit", "the chi cost needs --digit").into());
            };
            CostSpec::digit_indicator(n).map_err(|e| ConfigError::new("$.digit", e.to_string()))?
        }
    })
}

pub fn spectral_config(
    order: Option<usize>,
    digit_truncation: Option<u64>,
    tail_order: Option<usize>,
    digit_cap: Option<u64>,
) -> Result<SpectralConfig> {
    let mut cfg = match digit_cap {
        Some(m) => SpectralConfig::capped(order.unwrap_or(64), m),
        None => SpectralConfig::compact(),
    };
    if let Some(d) = order {
        cfg.order = d;
    }
    if let Some(m) = digit_truncation {
        cfg.digit_truncation = m;
    }
    if let Some(k) = tail_order {
        cfg.tail_order = k;
    }
    cfg.validate().map_err(|e| ConfigError::new("$.order", e.to_string()))?;
    Ok(cfg)
}

pub fn check_bound(path: &str, n: f64) -> Result<f64> {
    if !(n > 1.0) || !n.is_finite() {
        bail!(ConfigError::new(path, format!("bound must be a finite number > 1, got {n}")));
    }
    Ok(n)
}

pub fn check_grid(path: &str, grid: &[f64], min_len: usize) -> Result<()> {
    if grid.len() < min_len {
        bail!(ConfigError::new(path, format!("needs at least {min_len} values")));
    }
    if let Some(bad) = grid.iter().find(|x| !x.is_finite()) {
        bail!(ConfigError::new(path, format!("non-finite value {bad}")));
    }
    Ok(())
}
