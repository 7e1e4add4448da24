use std::time::{Duration, SystemTime, UNIX_EPOCH};

use pcauth_core::Timestamp;
use tokio::time::Instant;

/// Wall-clock milliseconds derived from the tokio monotonic clock.
///
/// Reading through `tokio::time::Instant` keeps timestamps monotonic and makes
/// them follow paused (virtual) time in simulations.
#[derive(Debug, Clone, Copy)]
pub struct Clock {
    origin_ms: Timestamp,
    origin: Instant,
}

impl Clock {
    pub fn system() -> Self {
        let now = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_millis() as Timestamp)
            .unwrap_or(0);
        Self::starting_at(now)
    }

    /// A clock reading `origin_ms` right now.
    pub fn starting_at(origin_ms: Timestamp) -> Self {
        Self {
            origin_ms,
            origin: Instant::now(),
        }
    }

    pub fn now_ms(&self) -> Timestamp {
        self.origin_ms + self.origin.elapsed().as_millis() as Timestamp
    }

    /// The monotonic instant at which this clock reads `at_ms`.
    pub fn instant_at(&self, at_ms: Timestamp) -> Instant {
        self.origin + Duration::from_millis(at_ms.saturating_sub(self.origin_ms))
    }
}
