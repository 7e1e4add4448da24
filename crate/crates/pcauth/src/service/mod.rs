//! The authentication service: device registry, request store, per-device
//! delivery queues and the blocking reads built on them.

mod config;
pub mod http;
pub mod persistence;

use std::collections::{HashMap, VecDeque};
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, MutexGuard};
use std::time::Duration;

use pcauth_core::{
    create_auth_request, DeviceClass, DeviceId, DeviceRegistry, PublicKey, RequestId, RequestState, RequestStore,
    SignedResponse, UserId, Verdict,
};
use rand::rngs::StdRng;
use rand::SeedableRng;
use tokio::sync::watch;
use tokio::time::Instant;

pub use config::{ServiceConfig, LISTEN_ENV};

use crate::clock::Clock;
use crate::error::{ApiError, LoadError};
use crate::wire::{self, DeviceInfo, OpenedRequest, PendingRequest, RequestResult};

#[derive(Default)]
struct Inner {
    registry: DeviceRegistry,
    store: RequestStore,
    /// Undelivered requests per device.
    queues: HashMap<DeviceId, VecDeque<RequestId>>,
    /// Bumped whenever a device's queue gains an entry.
    device_signals: HashMap<DeviceId, watch::Sender<u64>>,
    /// Live for pending requests only; receives the terminal state.
    request_signals: HashMap<RequestId, watch::Sender<RequestState>>,
    dirty: bool,
}

impl Inner {
    fn notify_request(&mut self, id: &RequestId, state: RequestState) {
        if state.is_terminal() {
            self.dirty = true;
            if let Some(tx) = self.request_signals.remove(id) {
                tx.send_replace(state);
            }
        }
    }
}

/// Counters used by tests and the bench harness.
#[derive(Debug, Default)]
pub struct ServiceCounters {
    pub enrollments: AtomicU64,
    pub opened: AtomicU64,
    pub polls: AtomicU64,
    pub submissions: AtomicU64,
    pub result_reads: AtomicU64,
}

impl ServiceCounters {
    pub fn total(&self) -> u64 {
        [
            &self.enrollments,
            &self.opened,
            &self.polls,
            &self.submissions,
            &self.result_reads,
        ]
        .iter()
        .map(|c| c.load(Ordering::Relaxed))
        .sum()
    }
}

pub struct AuthService {
    config: ServiceConfig,
    clock: Clock,
    inner: Mutex<Inner>,
    rng: Mutex<StdRng>,
    counters: ServiceCounters,
}

impl AuthService {
    pub fn new(config: ServiceConfig) -> Self {
        Self::with_clock(config, Clock::system())
    }

    pub fn with_clock(config: ServiceConfig, clock: Clock) -> Self {
        Self {
            config,
            clock,
            inner: Mutex::new(Inner::default()),
            rng: Mutex::new(StdRng::from_entropy()),
            counters: ServiceCounters::default(),
        }
    }

    /// Starts from the snapshot at `config.persistence_path`, if one is set.
    /// A missing file starts empty; an unreadable or corrupt one is an error.
    pub fn open(config: ServiceConfig, clock: Clock) -> Result<Self, LoadError> {
        let service = Self::with_clock(config, clock);
        if let Some(path) = service.config.persistence_path.clone() {
            if path.exists() {
                let snapshot = persistence::restore(&path)?;
                service.load_snapshot(snapshot);
            }
        }
        Ok(service)
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.config
    }

    pub fn clock(&self) -> &Clock {
        &self.clock
    }

    pub fn counters(&self) -> &ServiceCounters {
        &self.counters
    }

    fn lock(&self) -> MutexGuard<'_, Inner> {
        // state stays consistent across a panicking holder: every mutation
        // is a single store/registry call
        self.inner.lock().unwrap_or_else(|e| e.into_inner())
    }

    fn cap_wait(&self, max_wait_ms: u64) -> Duration {
        Duration::from_millis(max_wait_ms.min(self.config.long_poll_max_wait_ms))
    }

    pub fn enroll_device(
        &self,
        user_id: UserId,
        label: &str,
        device_class: DeviceClass,
        public_key: &[u8],
    ) -> Result<(DeviceInfo, bool), ApiError> {
        self.counters.enrollments.fetch_add(1, Ordering::Relaxed);
        let public_key = PublicKey::from_bytes(public_key).map_err(|e| ApiError::Invalid(e.to_string()))?;
        let now = self.clock.now_ms();
        let enrollment = {
            let mut inner = self.lock();
            let mut rng = self.rng.lock().unwrap_or_else(|e| e.into_inner());
            let enrollment = inner
                .registry
                .enroll(&mut *rng, user_id, label, device_class, public_key, now)
                .map_err(|e| ApiError::Invalid(e.to_string()))?;
            let id = enrollment.record.device_id.clone();
            inner.queues.entry(id.clone()).or_default();
            inner.device_signals.entry(id).or_insert_with(|| watch::channel(0).0);
            enrollment
        };
        if enrollment.created {
            self.persist()?;
        }
        Ok((DeviceInfo::from(&enrollment.record), enrollment.created))
    }

    pub fn open_auth_request(&self, user_id: UserId, ttl_ms: Option<u64>) -> Result<OpenedRequest, ApiError> {
        self.counters.opened.fetch_add(1, Ordering::Relaxed);
        let ttl = ttl_ms.unwrap_or(self.config.default_ttl_ms);
        let now = self.clock.now_ms();
        let mut inner = self.lock();
        let devices: Vec<DeviceId> = inner
            .registry
            .devices_for_user(&user_id)
            .map(|d| d.device_id.clone())
            .collect();
        if devices.is_empty() {
            return Err(ApiError::NotFound(format!("no devices enrolled for user {user_id}")));
        }
        let request = {
            let mut rng = self.rng.lock().unwrap_or_else(|e| e.into_inner());
            create_auth_request(user_id, &mut *rng, now, ttl).map_err(|e| ApiError::Invalid(e.to_string()))?
        };
        let opened = OpenedRequest {
            request_id: request.request_id().clone(),
            comparison_code: request.comparison_code(),
            created_at: request.created_at(),
            expires_at: request.expires_at(),
        };
        inner
            .store
            .insert(request)
            .map_err(|e| ApiError::Internal(e.to_string()))?;
        inner
            .request_signals
            .insert(opened.request_id.clone(), watch::channel(RequestState::Pending).0);
        for device in devices {
            let queue = inner.queues.entry(device.clone()).or_default();
            if !queue.contains(&opened.request_id) {
                queue.push_back(opened.request_id.clone());
            }
            if let Some(tx) = inner.device_signals.get(&device) {
                tx.send_modify(|v| *v += 1);
            }
        }
        Ok(opened)
    }

    /// Removes and returns every deliverable entry in the device's queue.
    /// Entries that are settled or past their deadline are dropped.
    fn drain(inner: &mut Inner, device_id: &DeviceId, now: u64) -> Vec<PendingRequest> {
        let Some(queue) = inner.queues.get_mut(device_id) else {
            return Vec::new();
        };
        let ids: Vec<RequestId> = queue.drain(..).collect();
        let mut out = Vec::new();
        for id in ids {
            let Some(request) = inner.store.read(&id, now) else {
                continue;
            };
            let state = request.state();
            if state == RequestState::Pending {
                out.push(PendingRequest {
                    request_id: id,
                    nonce: wire::encode(request.nonce().as_bytes()),
                    comparison_code: request.comparison_code(),
                    expires_at: request.expires_at(),
                });
            } else {
                inner.notify_request(&id, state);
            }
        }
        out
    }

    /// Long-poll for challenges addressed to `device_id`.
    pub async fn poll_pending(&self, device_id: &DeviceId, max_wait_ms: u64) -> Result<Vec<PendingRequest>, ApiError> {
        self.counters.polls.fetch_add(1, Ordering::Relaxed);
        let deadline = Instant::now() + self.cap_wait(max_wait_ms);
        loop {
            let mut rx = {
                let mut inner = self.lock();
                if inner.registry.get(device_id).is_none() {
                    return Err(ApiError::NotFound(format!("unknown device {device_id}")));
                }
                let ready = Self::drain(&mut inner, device_id, self.clock.now_ms());
                if !ready.is_empty() {
                    return Ok(ready);
                }
                let tx = inner
                    .device_signals
                    .entry(device_id.clone())
                    .or_insert_with(|| watch::channel(0).0);
                tx.subscribe()
            };
            if Instant::now() >= deadline {
                return Ok(Vec::new());
            }
            if tokio::time::timeout_at(deadline, rx.changed()).await.is_err() {
                return Ok(Vec::new());
            }
        }
    }

    /// Verifies a response under the store lock. `Err(NotFound)` for an
    /// unknown request id; rejections come back as `Ok(Verdict::Rejected)`.
    pub fn submit_response(&self, response: &SignedResponse) -> Result<Verdict, ApiError> {
        self.counters.submissions.fetch_add(1, Ordering::Relaxed);
        let now = self.clock.now_ms();
        let mut guard = self.lock();
        let inner = &mut *guard;
        let verdict = inner
            .store
            .submit(&inner.registry, response, now)
            .ok_or_else(|| ApiError::NotFound(format!("unknown request {}", response.request_id)))?;
        if let Some(state) = inner.store.get(&response.request_id).map(|r| r.state()) {
            inner.notify_request(&response.request_id, state);
        }
        Ok(verdict)
    }

    fn result_of(inner: &mut Inner, id: &RequestId, now: u64) -> Option<(RequestResult, u64)> {
        let request = inner.store.read(id, now)?;
        let result = RequestResult {
            request_id: id.clone(),
            state: request.state(),
            settled_by: request.settled_by().cloned(),
        };
        let expires_at = request.expires_at();
        inner.notify_request(id, result.state);
        Some((result, expires_at))
    }

    /// Blocks until the request leaves `pending` or the wait elapses. Never
    /// reports `pending` once the request's deadline has passed.
    pub async fn await_result(&self, request_id: &RequestId, max_wait_ms: u64) -> Result<RequestResult, ApiError> {
        self.counters.result_reads.fetch_add(1, Ordering::Relaxed);
        let deadline = Instant::now() + self.cap_wait(max_wait_ms);
        loop {
            let (result, expires_at, rx) = {
                let mut inner = self.lock();
                let (result, expires_at) = Self::result_of(&mut inner, request_id, self.clock.now_ms())
                    .ok_or_else(|| ApiError::NotFound(format!("unknown request {request_id}")))?;
                let rx = inner.request_signals.get(request_id).map(|tx| tx.subscribe());
                (result, expires_at, rx)
            };
            let Some(mut rx) = rx.filter(|_| !result.state.is_terminal()) else {
                return Ok(result);
            };
            if Instant::now() >= deadline {
                return Ok(result);
            }
            // wake at the request's own deadline too, so expiry is reported
            // without waiting for the sweep
            let wake = deadline.min(self.clock.instant_at(expires_at));
            let _ = tokio::time::timeout_at(wake, rx.changed()).await;
        }
    }

    /// Expires every due pending request. Returns the expired ids.
    pub fn sweep(&self) -> Vec<RequestId> {
        let now = self.clock.now_ms();
        let mut inner = self.lock();
        let expired = inner.store.expire_pending(now);
        for id in &expired {
            inner.notify_request(id, RequestState::Expired);
        }
        expired
    }

    /// Periodic expiry sweep plus flushing of the snapshot when terminal
    /// requests accumulated. Runs until the service is dropped.
    pub fn spawn_sweeper(self: &Arc<Self>) -> tokio::task::JoinHandle<()> {
        let weak = Arc::downgrade(self);
        let period = Duration::from_millis(self.config.sweep_interval_ms);
        tokio::spawn(async move {
            let mut ticker = tokio::time::interval(period);
            ticker.set_missed_tick_behavior(tokio::time::MissedTickBehavior::Delay);
            loop {
                ticker.tick().await;
                let Some(service) = weak.upgrade() else {
                    break;
                };
                service.sweep();
                let dirty = std::mem::take(&mut service.lock().dirty);
                if dirty {
                    if let Err(e) = service.persist() {
                        tracing::warn!("snapshot failed: {e}");
                    }
                }
            }
        })
    }

    pub fn snapshot(&self) -> persistence::Snapshot {
        let inner = self.lock();
        persistence::Snapshot::capture(&inner.registry, &inner.store)
    }

    fn load_snapshot(&self, snapshot: persistence::Snapshot) {
        let mut inner = self.lock();
        for record in snapshot.registry.iter() {
            inner.queues.insert(record.device_id.clone(), VecDeque::new());
            inner
                .device_signals
                .insert(record.device_id.clone(), watch::channel(0).0);
        }
        inner.registry = snapshot.registry;
        inner.store = snapshot.store;
    }

    pub fn persistence_path(&self) -> Option<&PathBuf> {
        self.config.persistence_path.as_ref()
    }

    /// Writes the snapshot to the configured path, if any.
    pub fn persist(&self) -> Result<(), ApiError> {
        let Some(path) = self.config.persistence_path.as_ref() else {
            return Ok(());
        };
        persistence::save(&self.snapshot(), path).map_err(|e| ApiError::Internal(e.to_string()))
    }

    /// Number of undelivered entries queued for a device.
    pub fn queue_len(&self, device_id: &DeviceId) -> usize {
        self.lock().queues.get(device_id).map_or(0, VecDeque::len)
    }

    pub fn request_state(&self, request_id: &RequestId) -> Option<RequestState> {
        self.lock().store.get(request_id).map(|r| r.state())
    }
}
