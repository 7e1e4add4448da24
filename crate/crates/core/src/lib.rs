//! Protocol core for confirming PC logins on an enrolled phone or watch.
//!
//! The PC opens an [`AuthRequest`] carrying a fresh 32-byte nonce and a
//! 3-digit [`ComparisonCode`]. Every device enrolled for the user may answer
//! with a [`SignedResponse`] over the request's canonical payload; the first
//! valid answer settles the request and every later one is rejected.
//!
//! Everything here is pure: callers supply the clock and the entropy source.
//! The crate is `no_std` (with `alloc`) unless the `std` feature is enabled.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod biometric;
pub mod code;
mod error;
pub mod ids;
pub mod keys;
pub mod latency;
pub mod payload;
pub mod registry;
pub mod request;
pub mod response;
pub mod stats;
pub mod store;
pub mod verify;

pub use code::ComparisonCode;
pub use error::Error;
pub use ids::{DeviceId, RequestId, UserId};
pub use keys::{KeyPair, PublicKey, Signature};
pub use latency::LatencyModel;
pub use payload::{canonical_payload, challenge_payload};
pub use registry::{DeviceClass, DeviceRecord, DeviceRegistry};
pub use request::{create_auth_request, AuthRequest, Challenge, Nonce, RequestState};
pub use response::{sign_challenge, sign_decision, Decision, SignedResponse};
pub use store::RequestStore;
pub use verify::{verify_response, RejectReason, Verdict};

/// Milliseconds since the Unix epoch.
pub type Timestamp = u64;
