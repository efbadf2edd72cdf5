//! Service configuration, read from TOML.
//!
//! ```toml
//! listen = "127.0.0.1:8080"
//! data_dir = "data"
//!
//! [apps.clash-royale]
//! report_currency = "USD"
//! strategy = "fifo"
//! catalog_path = "catalog.json"
//! cors_origin = "http://localhost:5173"
//! ```
//!
//! Relative paths are resolved against the directory holding the config
//! file. `GEMTRAIL_LISTEN` and `GEMTRAIL_DATA_DIR` override the file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use gemtrail_core::{LedgerConfig, Strategy};
use serde::Deserialize;
use thiserror::Error;

pub const ENV_LISTEN: &str = "GEMTRAIL_LISTEN";
pub const ENV_DATA_DIR: &str = "GEMTRAIL_DATA_DIR";

pub const DEFAULT_MAX_BODY_BYTES: usize = 1 << 20;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid config {path}: {message}")]
    Invalid { path: PathBuf, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AppConfig {
    #[serde(default = "default_currency")]
    pub report_currency: String,
    #[serde(default)]
    pub strategy: Strategy,
    #[serde(default)]
    pub catalog_path: Option<PathBuf>,
    #[serde(default)]
    pub cors_origin: Option<String>,
}

fn default_currency() -> String {
    "USD".into()
}

fn default_max_body() -> usize {
    DEFAULT_MAX_BODY_BYTES
}

impl Default for AppConfig {
    fn default() -> Self {
        AppConfig {
            report_currency: default_currency(),
            strategy: Strategy::Fifo,
            catalog_path: None,
            cors_origin: None,
        }
    }
}

impl AppConfig {
    pub fn ledger_config(&self) -> LedgerConfig {
        LedgerConfig::new(self.strategy, self.report_currency.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServiceConfig {
    pub listen: String,
    pub data_dir: PathBuf,
    #[serde(default = "default_max_body")]
    pub max_body_bytes: usize,
    #[serde(default)]
    pub apps: BTreeMap<String, AppConfig>,
}

impl ServiceConfig {
    pub fn from_toml(text: &str, base: &Path) -> Result<Self, ConfigError> {
        let invalid = |message: String| ConfigError::Invalid {
            path: base.to_path_buf(),
            message,
        };
        let mut config: ServiceConfig = toml::from_str(text).map_err(|e| invalid(e.to_string()))?;
        config.data_dir = base.join(&config.data_dir);
        for (app, c) in config.apps.iter_mut() {
            if app.is_empty() || app.contains('/') {
                return Err(invalid(format!("bad app id {app:?}")));
            }
            if !gemtrail_core::CurrencyId::looks_real(&c.report_currency) {
                return Err(invalid(format!(
                    "app {app}: report_currency {:?} is not an ISO code",
                    c.report_currency
                )));
            }
            if let Some(p) = &mut c.catalog_path {
                *p = base.join(&*p);
            }
        }
        if config.max_body_bytes == 0 {
            return Err(invalid("max_body_bytes must be positive".into()));
        }
        Ok(config)
    }

    /// Reads `path` and applies environment overrides.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        let mut config = Self::from_toml(&text, base).map_err(|e| match e {
            ConfigError::Invalid { message, .. } => ConfigError::Invalid {
                path: path.to_path_buf(),
                message,
            },
            other => other,
        })?;
        config.apply_env(|k| std::env::var(k).ok());
        Ok(config)
    }

    pub fn apply_env(&mut self, var: impl Fn(&str) -> Option<String>) {
        if let Some(listen) = var(ENV_LISTEN).filter(|v| !v.is_empty()) {
            self.listen = listen;
        }
        if let Some(dir) = var(ENV_DATA_DIR).filter(|v| !v.is_empty()) {
            self.data_dir = PathBuf::from(dir);
        }
    }

    pub fn cors_origins(&self) -> Vec<String> {
        let mut origins: Vec<String> = self
            .apps
            .values()
            .filter_map(|a| a.cors_origin.clone())
            .collect();
        origins.sort();
        origins.dedup();
        origins
    }
}
