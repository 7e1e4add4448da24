//! Push-to-confirm login: the auth service, the login adapter, the device
//! agent and the benchmark harness, built on `pcauth-core`.

pub mod adapter;
pub mod agent;
pub mod api;
pub mod bench;
pub mod clock;
pub mod error;
pub mod service;
pub mod wire;

pub use pcauth_core as core;
