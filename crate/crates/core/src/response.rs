use core::fmt;

use crate::payload::challenge_payload;
use crate::request::Challenge;
use crate::{AuthRequest, DeviceId, KeyPair, RequestId, Signature};

/// A device's answer to a request.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Decision {
    Confirm,
    Deny,
}

impl Decision {
    pub fn payload_byte(self) -> u8 {
        match self {
            Decision::Confirm => 0x01,
            Decision::Deny => 0x00,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Decision::Confirm => "confirm",
            Decision::Deny => "deny",
        }
    }
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A decision bound to one request and one device by a signature over
/// [`canonical_payload`](crate::canonical_payload).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignedResponse {
    pub request_id: RequestId,
    pub device_id: DeviceId,
    pub decision: Decision,
    pub signature: Signature,
}

pub fn sign_decision(
    keys: &KeyPair,
    request: &AuthRequest,
    device_id: &DeviceId,
    decision: Decision,
) -> SignedResponse {
    sign_challenge(keys, &request.challenge(), device_id, decision)
}

pub fn sign_challenge(
    keys: &KeyPair,
    challenge: &Challenge,
    device_id: &DeviceId,
    decision: Decision,
) -> SignedResponse {
    let payload = challenge_payload(challenge, device_id, decision);
    SignedResponse {
        request_id: challenge.request_id.clone(),
        device_id: device_id.clone(),
        decision,
        signature: keys.sign(&payload),
    }
}
