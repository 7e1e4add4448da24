#![allow(dead_code)]

use std::sync::Arc;

use pcauth::api::{HttpClient, ServiceApi};
use pcauth::service::{http, AuthService, ServiceConfig};
use pcauth::wire::DeviceInfo;
use pcauth_core::{DeviceClass, KeyPair, UserId};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

pub fn config() -> ServiceConfig {
    ServiceConfig {
        listen_address: "127.0.0.1:0".parse().unwrap(),
        ..ServiceConfig::default()
    }
}

pub async fn start_with(config: ServiceConfig) -> (http::RunningService, HttpClient) {
    let service = Arc::new(AuthService::new(config));
    let running = http::serve(service, "127.0.0.1:0".parse().unwrap()).await.unwrap();
    let client = HttpClient::new(&running.url()).unwrap();
    (running, client)
}

pub async fn start() -> (http::RunningService, HttpClient) {
    start_with(config()).await
}

pub fn user(name: &str) -> UserId {
    UserId::new(name).unwrap()
}

pub fn keys(seed: u64) -> KeyPair {
    KeyPair::generate(&mut ChaCha20Rng::seed_from_u64(seed)).unwrap()
}

pub async fn enroll(api: &dyn ServiceApi, user_id: &UserId, seed: u64, class: DeviceClass) -> (KeyPair, DeviceInfo) {
    let kp = keys(seed);
    let info = api
        .enroll_device(user_id, &format!("device {seed}"), class, &kp.public_key())
        .await
        .unwrap();
    (kp, info)
}

/// Enrolls a sampled agent for `user_id` and runs it in the background.
pub async fn spawn_agent(
    api: Arc<dyn ServiceApi>,
    user_id: &UserId,
    profile: pcauth::agent::AgentProfile,
    seed: u64,
) -> (
    tokio::task::JoinHandle<()>,
    pcauth_core::DeviceId,
    tokio::sync::mpsc::UnboundedReceiver<pcauth::agent::AgentEvent>,
) {
    use pcauth::agent::{Agent, Behavior};
    let class = profile.device_class;
    let mut agent = Agent::enroll(api, user_id, "agent", class, Behavior::sampled(profile, seed))
        .await
        .unwrap();
    let events = agent.subscribe();
    let device = agent.device_id().clone();
    (tokio::spawn(agent.run()), device, events)
}
