use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::LoadError;

pub const LISTEN_ENV: &str = "PCAUTH_LISTEN";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServiceConfig {
    pub listen_address: SocketAddr,
    pub default_ttl_ms: u64,
    pub persistence_path: Option<PathBuf>,
    pub long_poll_max_wait_ms: u64,
    pub sweep_interval_ms: u64,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            listen_address: SocketAddr::from(([127, 0, 0, 1], 7878)),
            default_ttl_ms: 60_000,
            persistence_path: None,
            long_poll_max_wait_ms: 25_000,
            sweep_interval_ms: 100,
        }
    }
}

impl ServiceConfig {
    pub fn load(path: &Path) -> Result<Self, LoadError> {
        let text = std::fs::read_to_string(path).map_err(|source| LoadError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let config: Self = toml::from_str(&text).map_err(|e| LoadError::Parse {
            path: path.display().to_string(),
            detail: e.to_string(),
        })?;
        config.validate().map_err(|detail| LoadError::Invalid {
            path: path.display().to_string(),
            detail,
        })?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.default_ttl_ms == 0 {
            return Err("default_ttl_ms must be positive".into());
        }
        if self.long_poll_max_wait_ms == 0 {
            return Err("long_poll_max_wait_ms must be positive".into());
        }
        if self.sweep_interval_ms == 0 {
            return Err("sweep_interval_ms must be positive".into());
        }
        Ok(())
    }
}
