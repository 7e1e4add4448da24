//! Local key file standing in for a phone's secure storage. Written with
//! owner-only permissions on Unix.

use std::io::Write;
use std::path::Path;

use pcauth_core::{DeviceId, KeyPair, UserId};
use rand::rngs::OsRng;
use serde::{Deserialize, Serialize};

use crate::error::LoadError;
use crate::wire;

const KEYSTORE_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct KeyFile {
    version: u32,
    secret_key: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    device_id: Option<DeviceId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    user_id: Option<UserId>,
}

#[derive(Debug, Clone)]
pub struct KeyStore {
    pub keys: KeyPair,
    /// Set once the key is enrolled.
    pub device_id: Option<DeviceId>,
    pub user_id: Option<UserId>,
}

impl KeyStore {
    pub fn generate() -> Result<Self, pcauth_core::Error> {
        Ok(Self {
            keys: KeyPair::generate(&mut OsRng)?,
            device_id: None,
            user_id: None,
        })
    }

    /// Loads the key file, creating a fresh key pair there on first start.
    /// Returns whether the file was created.
    pub fn load_or_create(path: &Path) -> Result<(Self, bool), LoadError> {
        if path.exists() {
            return Self::load(path).map(|s| (s, false));
        }
        let store = Self::generate().map_err(|e| LoadError::Invalid {
            path: path.display().to_string(),
            detail: e.to_string(),
        })?;
        store.save(path).map_err(|source| LoadError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Ok((store, true))
    }

    pub fn load(path: &Path) -> Result<Self, LoadError> {
        let err = |detail: String| LoadError::Parse {
            path: path.display().to_string(),
            detail,
        };
        let text = std::fs::read_to_string(path).map_err(|source| LoadError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let file: KeyFile = serde_json::from_str(&text).map_err(|e| err(e.to_string()))?;
        if file.version != KEYSTORE_VERSION {
            return Err(err(format!("unsupported key file version {}", file.version)));
        }
        let secret = wire::decode(&file.secret_key).map_err(err)?;
        let keys = KeyPair::from_secret_bytes(&secret).map_err(|e| err(e.to_string()))?;
        Ok(Self {
            keys,
            device_id: file.device_id,
            user_id: file.user_id,
        })
    }

    pub fn save(&self, path: &Path) -> std::io::Result<()> {
        let file = KeyFile {
            version: KEYSTORE_VERSION,
            secret_key: wire::encode(&self.keys.secret_bytes()),
            device_id: self.device_id.clone(),
            user_id: self.user_id.clone(),
        };
        let text = serde_json::to_string_pretty(&file).map_err(std::io::Error::other)?;
        let mut options = std::fs::OpenOptions::new();
        options.write(true).create(true).truncate(true);
        #[cfg(unix)]
        {
            use std::os::unix::fs::OpenOptionsExt;
            options.mode(0o600);
        }
        let mut f = options.open(path)?;
        f.write_all(text.as_bytes())?;
        f.sync_all()
    }
}
