//! Headless stand-in for the phone or watch app: holds the private key,
//! long-polls for challenges and answers them after simulated human delays.

mod keystore;
mod profile;

use std::collections::{HashSet, VecDeque};
use std::sync::Arc;
use std::time::Duration;

use pcauth_core::{sign_challenge, Challenge, DeviceId, KeyPair, RequestId, UserId, Verdict};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use tokio::sync::mpsc;

pub use keystore::KeyStore;
pub use profile::{AgentProfile, AttemptPlan, ConfirmMethod, DecisionPolicy, ProfileSampler};

use crate::api::ServiceApi;
use crate::error::ApiError;
use crate::wire::PendingRequest;

pub const BACKOFF_START: Duration = Duration::from_millis(100);
pub const BACKOFF_CAP: Duration = Duration::from_secs(5);

/// Where attempt plans come from.
pub enum Behavior {
    /// Sampled from a profile with a seeded generator.
    Sampled {
        sampler: ProfileSampler,
        rng: Box<ChaCha20Rng>,
    },
    /// Replayed in order; once empty the agent leaves requests unanswered.
    Schedule(VecDeque<AttemptPlan>),
}

impl Behavior {
    pub fn sampled(profile: AgentProfile, seed: u64) -> Self {
        Behavior::Sampled {
            sampler: ProfileSampler::new(profile),
            rng: Box::new(ChaCha20Rng::seed_from_u64(seed)),
        }
    }

    fn next_plan(&mut self) -> Option<AttemptPlan> {
        match self {
            Behavior::Sampled { sampler, rng } => Some(sampler.sample(rng.as_mut())),
            Behavior::Schedule(plans) => plans.pop_front(),
        }
    }
}

/// One answered request.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentEvent {
    pub request_id: RequestId,
    pub plan: AttemptPlan,
    pub verdict: Verdict,
    /// Wall time spent between picking the request up and the verdict.
    pub elapsed: Duration,
}

pub struct AgentOptions {
    /// Multiplies every simulated delay.
    pub time_scale: f64,
    pub poll_wait_ms: u64,
}

impl Default for AgentOptions {
    fn default() -> Self {
        Self {
            time_scale: 1.0,
            poll_wait_ms: 25_000,
        }
    }
}

pub struct Agent {
    api: Arc<dyn ServiceApi>,
    keys: KeyPair,
    device_id: DeviceId,
    behavior: Behavior,
    options: AgentOptions,
    answered: HashSet<RequestId>,
    events: Option<mpsc::UnboundedSender<AgentEvent>>,
}

impl Agent {
    pub fn new(api: Arc<dyn ServiceApi>, keys: KeyPair, device_id: DeviceId, behavior: Behavior) -> Self {
        Self {
            api,
            keys,
            device_id,
            behavior,
            options: AgentOptions::default(),
            answered: HashSet::new(),
            events: None,
        }
    }

    pub fn with_options(mut self, options: AgentOptions) -> Self {
        self.options = options;
        self
    }

    /// Reports every answered request on the returned channel.
    pub fn subscribe(&mut self) -> mpsc::UnboundedReceiver<AgentEvent> {
        let (tx, rx) = mpsc::unbounded_channel();
        self.events = Some(tx);
        rx
    }

    pub fn device_id(&self) -> &DeviceId {
        &self.device_id
    }

    /// Generates a key pair and enrolls it for `user_id`.
    pub async fn enroll(
        api: Arc<dyn ServiceApi>,
        user_id: &UserId,
        label: &str,
        device_class: pcauth_core::DeviceClass,
        behavior: Behavior,
    ) -> Result<Self, ApiError> {
        let store = KeyStore::generate().map_err(|e| ApiError::Internal(e.to_string()))?;
        let info = api
            .enroll_device(user_id, label, device_class, &store.keys.public_key())
            .await?;
        Ok(Self::new(api, store.keys, info.device_id, behavior))
    }

    async fn pause(&self, ms: f64) {
        let scaled = ms * self.options.time_scale;
        if scaled > 0.0 {
            tokio::time::sleep(Duration::from_secs_f64(scaled / 1_000.0)).await;
        }
    }

    /// Answers one delivered request, unless it was already answered or
    /// there is no plan for it. Returns the verdict the service gave.
    pub async fn handle(&mut self, pending: &PendingRequest) -> Result<Option<Verdict>, ApiError> {
        if self.answered.contains(&pending.request_id) {
            return Ok(None);
        }
        let started = tokio::time::Instant::now();
        let nonce = pending.nonce().map_err(ApiError::Invalid)?;
        let Some(plan) = self.behavior.next_plan() else {
            return Ok(None);
        };
        self.answered.insert(pending.request_id.clone());
        self.pause(plan.unlock_ms).await;
        self.pause(plan.confirm_ms).await;
        if let Some(retry) = plan.retry_ms {
            self.pause(retry).await;
        }
        let challenge = Challenge {
            request_id: pending.request_id.clone(),
            nonce,
        };
        let response = sign_challenge(&self.keys, &challenge, &self.device_id, plan.decision);
        let verdict = self.api.submit_response(&response).await?;
        if let Some(tx) = &self.events {
            let _ = tx.send(AgentEvent {
                request_id: pending.request_id.clone(),
                plan,
                verdict,
                elapsed: started.elapsed(),
            });
        }
        Ok(Some(verdict))
    }

    /// Polls and answers until the task is dropped. Transport failures back
    /// off exponentially from 100 ms up to 5 s.
    pub async fn run(mut self) {
        let mut backoff = BACKOFF_START;
        loop {
            let polled = self.api.poll_pending(&self.device_id, self.options.poll_wait_ms).await;
            let batch = match polled {
                Ok(batch) => {
                    backoff = BACKOFF_START;
                    batch
                }
                Err(e) => {
                    tracing::warn!(device = %self.device_id, "poll failed: {e}; retrying in {backoff:?}");
                    tokio::time::sleep(backoff).await;
                    backoff = (backoff * 2).min(BACKOFF_CAP);
                    continue;
                }
            };
            // one person, one request at a time
            for pending in batch {
                match self.handle(&pending).await {
                    Ok(Some(verdict)) => {
                        tracing::info!(device = %self.device_id, request = %pending.request_id, code = %pending.comparison_code, ?verdict, "answered");
                    }
                    Ok(None) => {}
                    Err(e) => tracing::warn!(device = %self.device_id, "submit failed: {e}"),
                }
            }
        }
    }
}
