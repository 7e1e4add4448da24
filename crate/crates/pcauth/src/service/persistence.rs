//! Versioned JSON snapshot of the device registry and the log of terminal
//! requests. Pending requests are never written; they expire on restart.

use std::io::Write;
use std::path::Path;

use pcauth_core::request::Nonce;
use pcauth_core::{
    AuthRequest, ComparisonCode, DeviceId, DeviceRecord, DeviceRegistry, RequestId, RequestState, RequestStore,
    Timestamp, UserId,
};
use serde::{Deserialize, Serialize};

use crate::error::LoadError;
use crate::wire::{self, DeviceInfo};

pub const SNAPSHOT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct RequestEntry {
    request_id: RequestId,
    user_id: UserId,
    nonce: String,
    comparison_code: ComparisonCode,
    created_at: Timestamp,
    expires_at: Timestamp,
    state: RequestState,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    settled_by: Option<DeviceId>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SnapshotFile {
    version: u32,
    devices: Vec<DeviceInfo>,
    requests: Vec<RequestEntry>,
}

#[derive(Debug, Clone, Default)]
pub struct Snapshot {
    pub registry: DeviceRegistry,
    pub store: RequestStore,
}

impl Snapshot {
    /// Copies the registry and the terminal requests.
    pub fn capture(registry: &DeviceRegistry, store: &RequestStore) -> Self {
        let mut terminal = RequestStore::new();
        for r in store.iter().filter(|r| r.state().is_terminal()) {
            // ids are unique in the source store
            let _ = terminal.insert(r.clone());
        }
        Self {
            registry: registry.clone(),
            store: terminal,
        }
    }

    fn to_file(&self) -> SnapshotFile {
        SnapshotFile {
            version: SNAPSHOT_VERSION,
            devices: self.registry.iter().map(DeviceInfo::from).collect(),
            requests: self
                .store
                .iter()
                .map(|r| RequestEntry {
                    request_id: r.request_id().clone(),
                    user_id: r.user_id().clone(),
                    nonce: wire::encode(r.nonce().as_bytes()),
                    comparison_code: r.comparison_code(),
                    created_at: r.created_at(),
                    expires_at: r.expires_at(),
                    state: r.state(),
                    settled_by: r.settled_by().cloned(),
                })
                .collect(),
        }
    }

    fn from_file(file: SnapshotFile) -> Result<Self, String> {
        if file.version != SNAPSHOT_VERSION {
            return Err(format!("unsupported snapshot version {}", file.version));
        }
        let mut registry = DeviceRegistry::new();
        for d in file.devices {
            let id = d.device_id.clone();
            let record = DeviceRecord::try_from(d).map_err(|e| format!("device {id}: {e}"))?;
            registry.insert(record).map_err(|_| format!("duplicate device {id}"))?;
        }
        let mut store = RequestStore::new();
        for e in file.requests {
            let id = e.request_id.clone();
            if !e.state.is_terminal() {
                return Err(format!("request {id} is not terminal"));
            }
            let nonce = wire::decode(&e.nonce)
                .and_then(|b| Nonce::from_bytes(&b).map_err(|e| e.to_string()))
                .map_err(|err| format!("request {id}: {err}"))?;
            let request = AuthRequest::from_parts(
                e.request_id,
                e.user_id,
                nonce,
                e.comparison_code,
                e.created_at,
                e.expires_at,
                e.state,
                e.settled_by,
            )
            .map_err(|err| format!("request {id}: {err}"))?;
            store.insert(request).map_err(|_| format!("duplicate request {id}"))?;
        }
        Ok(Self { registry, store })
    }

    pub fn to_json(&self) -> String {
        // plain data, cannot fail
        serde_json::to_string_pretty(&self.to_file()).unwrap_or_default()
    }

    /// Parses snapshot text. Empty (or whitespace-only) text is an empty
    /// snapshot.
    pub fn from_json(text: &str) -> Result<Self, String> {
        if text.trim().is_empty() {
            return Ok(Self::default());
        }
        let file: SnapshotFile = serde_json::from_str(text).map_err(|e| e.to_string())?;
        Self::from_file(file)
    }
}

/// Writes atomically: temp file in the same directory, then rename.
pub fn save(snapshot: &Snapshot, path: &Path) -> std::io::Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let tmp = dir.join(format!(
        ".{}.tmp",
        path.file_name().and_then(|n| n.to_str()).unwrap_or("snapshot")
    ));
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(snapshot.to_json().as_bytes())?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)
}

pub fn restore(path: &Path) -> Result<Snapshot, LoadError> {
    let text = std::fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Snapshot::from_json(&text).map_err(|detail| LoadError::Parse {
        path: path.display().to_string(),
        detail,
    })
}
