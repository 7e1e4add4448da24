//! Response verification.

use core::fmt;

use crate::{canonical_payload, AuthRequest, Decision, DeviceRegistry, SignedResponse, Timestamp};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum RejectReason {
    Expired,
    AlreadySettled,
    UnknownDevice,
    BadSignature,
}

impl RejectReason {
    pub fn as_str(self) -> &'static str {
        match self {
            RejectReason::Expired => "expired",
            RejectReason::AlreadySettled => "already_settled",
            RejectReason::UnknownDevice => "unknown_device",
            RejectReason::BadSignature => "bad_signature",
        }
    }
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    Confirmed,
    Denied,
    Rejected(RejectReason),
}

impl Verdict {
    /// Whether this verdict settled the request.
    pub fn is_settling(self) -> bool {
        matches!(self, Verdict::Confirmed | Verdict::Denied)
    }
}

/// Checks `response` against `request` and applies the resulting transition.
///
/// Check order: request already terminal, deadline passed (the request is
/// expired as a side effect), device not enrolled for the request's user,
/// signature invalid over the canonical payload. A response naming a
/// different request counts as a bad signature.
pub fn verify_response(
    registry: &DeviceRegistry,
    request: &mut AuthRequest,
    response: &SignedResponse,
    now: Timestamp,
) -> Verdict {
    if !request.is_pending() {
        return Verdict::Rejected(RejectReason::AlreadySettled);
    }
    if request.is_due(now) {
        request.expire_if_due(now);
        return Verdict::Rejected(RejectReason::Expired);
    }
    let Some(device) = registry.enrolled_for(&response.device_id, request.user_id()) else {
        return Verdict::Rejected(RejectReason::UnknownDevice);
    };
    if &response.request_id != request.request_id() {
        return Verdict::Rejected(RejectReason::BadSignature);
    }
    let payload = canonical_payload(request, &response.device_id, response.decision);
    if !device.public_key.verify(&payload, &response.signature) {
        return Verdict::Rejected(RejectReason::BadSignature);
    }
    let confirmed = response.decision == Decision::Confirm;
    match request.settle(confirmed, response.device_id.clone()) {
        Ok(()) if confirmed => Verdict::Confirmed,
        Ok(()) => Verdict::Denied,
        Err(_) => Verdict::Rejected(RejectReason::AlreadySettled),
    }
}
