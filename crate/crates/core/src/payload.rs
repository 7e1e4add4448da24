//! The byte string a device signs.
//!
//! Layout (normative):
//!
//! ```text
//! request_id (UTF-8) | 0x00 | nonce (32 bytes) | 0x00 | device_id (UTF-8) | 0x00 | decision
//! ```
//!
//! where `decision` is `0x01` for confirm and `0x00` for deny. Ids cannot
//! contain NUL and the nonce has a fixed length, so distinct inputs never
//! produce the same bytes.

use alloc::vec::Vec;

use crate::request::{Challenge, Nonce};
use crate::{AuthRequest, Decision, DeviceId, RequestId};

pub fn canonical_payload(request: &AuthRequest, device_id: &DeviceId, decision: Decision) -> Vec<u8> {
    payload_bytes(request.request_id(), request.nonce(), device_id, decision)
}

/// Same bytes as [`canonical_payload`], built from what a device receives.
pub fn challenge_payload(challenge: &Challenge, device_id: &DeviceId, decision: Decision) -> Vec<u8> {
    payload_bytes(&challenge.request_id, &challenge.nonce, device_id, decision)
}

fn payload_bytes(request_id: &RequestId, nonce: &Nonce, device_id: &DeviceId, decision: Decision) -> Vec<u8> {
    let request_id = request_id.as_str().as_bytes();
    let device = device_id.as_str().as_bytes();
    let mut out = Vec::with_capacity(request_id.len() + device.len() + 32 + 4);
    out.extend_from_slice(request_id);
    out.push(0x00);
    out.extend_from_slice(nonce.as_bytes());
    out.push(0x00);
    out.extend_from_slice(device);
    out.push(0x00);
    out.push(decision.payload_byte());
    out
}
