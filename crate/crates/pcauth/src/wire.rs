//! JSON bodies of the HTTP interface.
//!
//! Byte strings travel as standard padded base64 and timestamps as integer
//! milliseconds since the Unix epoch.

use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use pcauth_core::request::Nonce;
use pcauth_core::{
    ComparisonCode, Decision, DeviceClass, DeviceId, DeviceRecord, PublicKey, RejectReason, RequestId, RequestState,
    Signature, SignedResponse, Timestamp, UserId,
};
use serde::{Deserialize, Serialize};

pub fn encode(bytes: &[u8]) -> String {
    STANDARD.encode(bytes)
}

pub fn decode(text: &str) -> Result<Vec<u8>, String> {
    STANDARD.decode(text).map_err(|e| e.to_string())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnrollDevice {
    pub user_id: UserId,
    pub label: String,
    pub device_class: DeviceClass,
    /// base64
    pub public_key: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeviceInfo {
    pub device_id: DeviceId,
    pub user_id: UserId,
    pub label: String,
    pub device_class: DeviceClass,
    pub public_key: String,
    pub enrolled_at: Timestamp,
}

impl From<&DeviceRecord> for DeviceInfo {
    fn from(r: &DeviceRecord) -> Self {
        Self {
            device_id: r.device_id.clone(),
            user_id: r.user_id.clone(),
            label: r.label.clone(),
            device_class: r.device_class,
            public_key: encode(r.public_key.as_bytes()),
            enrolled_at: r.enrolled_at,
        }
    }
}

impl TryFrom<DeviceInfo> for DeviceRecord {
    type Error = String;

    fn try_from(d: DeviceInfo) -> Result<Self, String> {
        let key = decode(&d.public_key)?;
        Ok(DeviceRecord {
            device_id: d.device_id,
            user_id: d.user_id,
            label: d.label,
            device_class: d.device_class,
            public_key: PublicKey::from_bytes(&key).map_err(|e| e.to_string())?,
            enrolled_at: d.enrolled_at,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpenAuthRequest {
    pub user_id: UserId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ttl_ms: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpenedRequest {
    pub request_id: RequestId,
    pub comparison_code: ComparisonCode,
    pub created_at: Timestamp,
    pub expires_at: Timestamp,
}

/// A challenge as delivered to a device.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PendingRequest {
    pub request_id: RequestId,
    /// base64, 32 bytes
    pub nonce: String,
    pub comparison_code: ComparisonCode,
    pub expires_at: Timestamp,
}

impl PendingRequest {
    pub fn nonce(&self) -> Result<Nonce, String> {
        Nonce::from_bytes(&decode(&self.nonce)?).map_err(|e| e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PendingList {
    pub requests: Vec<PendingRequest>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResponseBody {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub request_id: Option<RequestId>,
    pub device_id: DeviceId,
    pub decision: Decision,
    /// base64, 64 bytes
    pub signature: String,
}

impl ResponseBody {
    pub fn from_response(r: &SignedResponse) -> Self {
        Self {
            request_id: Some(r.request_id.clone()),
            device_id: r.device_id.clone(),
            decision: r.decision,
            signature: encode(r.signature.as_bytes()),
        }
    }

    /// Rebuilds the signed response for the request named in the path.
    pub fn into_response(self, path_id: RequestId) -> Result<SignedResponse, String> {
        if let Some(body_id) = &self.request_id {
            if body_id != &path_id {
                return Err("request_id in body does not match path".into());
            }
        }
        let sig = decode(&self.signature)?;
        Ok(SignedResponse {
            request_id: path_id,
            device_id: self.device_id,
            decision: self.decision,
            signature: Signature::from_bytes(&sig).map_err(|e| e.to_string())?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictKind {
    Confirmed,
    Denied,
    Rejected,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerdictBody {
    pub verdict: VerdictKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<RejectReason>,
}

impl From<pcauth_core::Verdict> for VerdictBody {
    fn from(v: pcauth_core::Verdict) -> Self {
        use pcauth_core::Verdict;
        match v {
            Verdict::Confirmed => Self {
                verdict: VerdictKind::Confirmed,
                reason: None,
            },
            Verdict::Denied => Self {
                verdict: VerdictKind::Denied,
                reason: None,
            },
            Verdict::Rejected(r) => Self {
                verdict: VerdictKind::Rejected,
                reason: Some(r),
            },
        }
    }
}

impl TryFrom<VerdictBody> for pcauth_core::Verdict {
    type Error = String;

    fn try_from(b: VerdictBody) -> Result<Self, String> {
        use pcauth_core::Verdict;
        match (b.verdict, b.reason) {
            (VerdictKind::Confirmed, _) => Ok(Verdict::Confirmed),
            (VerdictKind::Denied, _) => Ok(Verdict::Denied),
            (VerdictKind::Rejected, Some(r)) => Ok(Verdict::Rejected(r)),
            (VerdictKind::Rejected, None) => Err("rejected verdict without reason".into()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RequestResult {
    pub request_id: RequestId,
    pub state: RequestState,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub settled_by: Option<DeviceId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}
