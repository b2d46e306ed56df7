use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Environment variable that overrides [`Config::zero_cache_path`].
pub const ZERO_CACHE_ENV: &str = "SHARPEXT_ZERO_CACHE";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
    Text,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(Self::Json),
            "csv" => Ok(Self::Csv),
            "text" => Ok(Self::Text),
            other => Err(Error::Config(format!("unknown output format {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default, deny_unknown_fields)]
pub struct Config {
    pub truncation_n: usize,
    pub tail_target: f64,
    pub bessel_tol: f64,
    pub zero_cache_path: Option<PathBuf>,
    pub output_format: OutputFormat,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            truncation_n: 22000,
            tail_target: 1e-4,
            bessel_tol: 1e-12,
            zero_cache_path: None,
            output_format: OutputFormat::Json,
        }
    }
}

impl Config {
    pub fn validate(&self) -> Result<()> {
        if self.truncation_n < 1000 {
            return Err(Error::Config(format!(
                "truncationN = {} is below 1000",
                self.truncation_n
            )));
        }
        if !(self.tail_target > 0.0 && self.tail_target.is_finite()) {
            return Err(Error::Config(format!(
                "tailTarget = {} must be positive",
                self.tail_target
            )));
        }
        if !(self.bessel_tol > 0.0 && self.bessel_tol < 1e-3) {
            return Err(Error::Config(format!(
                "besselTol = {} must lie in (0, 1e-3)",
                self.bessel_tol
            )));
        }
        Ok(())
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cfg: Config = serde_json::from_str(&text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Cache path from the environment, falling back to the configured one.
    pub fn effective_cache_path(&self) -> Option<PathBuf> {
        match std::env::var_os(ZERO_CACHE_ENV) {
            Some(p) if !p.is_empty() => Some(PathBuf::from(p)),
            _ => self.zero_cache_path.clone(),
        }
    }
}
