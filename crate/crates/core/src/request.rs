//! Authentication requests and their single-use state machine.

use core::fmt;

use rand_core::{CryptoRng, RngCore};

use crate::{ComparisonCode, DeviceId, Error, RequestId, Timestamp, UserId};

pub const NONCE_LEN: usize = 32;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Nonce([u8; NONCE_LEN]);

impl Nonce {
    pub fn random<R: RngCore + CryptoRng>(rng: &mut R) -> Result<Self, Error> {
        let mut raw = [0u8; NONCE_LEN];
        rng.try_fill_bytes(&mut raw).map_err(|_| Error::EntropyUnavailable)?;
        Ok(Self(raw))
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, Error> {
        bytes
            .try_into()
            .map(Self)
            .map_err(|_| Error::InvalidArgument("nonce must be 32 bytes"))
    }

    pub fn as_bytes(&self) -> &[u8; NONCE_LEN] {
        &self.0
    }
}

impl fmt::Debug for Nonce {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Nonce(")?;
        for b in &self.0[..6] {
            write!(f, "{b:02x}")?;
        }
        write!(f, "..)")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum RequestState {
    Pending,
    Confirmed,
    Denied,
    Expired,
}

impl RequestState {
    pub fn is_terminal(self) -> bool {
        self != RequestState::Pending
    }

    pub fn as_str(self) -> &'static str {
        match self {
            RequestState::Pending => "pending",
            RequestState::Confirmed => "confirmed",
            RequestState::Denied => "denied",
            RequestState::Expired => "expired",
        }
    }
}

impl fmt::Display for RequestState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The part of a request a device needs in order to answer it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Challenge {
    pub request_id: RequestId,
    pub nonce: Nonce,
}

/// The request already left `pending`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AlreadySettled(pub RequestState);

/// One authentication attempt.
///
/// Fields are read-only from outside; the only mutations are the
/// `pending -> {confirmed, denied, expired}` transitions, each of which
/// succeeds at most once.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuthRequest {
    request_id: RequestId,
    user_id: UserId,
    nonce: Nonce,
    comparison_code: ComparisonCode,
    created_at: Timestamp,
    expires_at: Timestamp,
    state: RequestState,
    settled_by: Option<DeviceId>,
}

/// Opens a pending request with a fresh nonce and comparison code that
/// expires `ttl_ms` after `now`.
pub fn create_auth_request<R: RngCore + CryptoRng>(
    user_id: UserId,
    rng: &mut R,
    now: Timestamp,
    ttl_ms: u64,
) -> Result<AuthRequest, Error> {
    if ttl_ms == 0 {
        return Err(Error::InvalidArgument("ttl must be positive"));
    }
    let expires_at = now
        .checked_add(ttl_ms)
        .ok_or(Error::InvalidArgument("ttl overflows the clock"))?;
    Ok(AuthRequest {
        request_id: RequestId::random(rng)?,
        user_id,
        nonce: Nonce::random(rng)?,
        comparison_code: ComparisonCode::random(rng),
        created_at: now,
        expires_at,
        state: RequestState::Pending,
        settled_by: None,
    })
}

impl AuthRequest {
    pub fn request_id(&self) -> &RequestId {
        &self.request_id
    }

    pub fn user_id(&self) -> &UserId {
        &self.user_id
    }

    pub fn nonce(&self) -> &Nonce {
        &self.nonce
    }

    pub fn challenge(&self) -> Challenge {
        Challenge {
            request_id: self.request_id.clone(),
            nonce: self.nonce,
        }
    }

    pub fn comparison_code(&self) -> ComparisonCode {
        self.comparison_code
    }

    pub fn created_at(&self) -> Timestamp {
        self.created_at
    }

    pub fn expires_at(&self) -> Timestamp {
        self.expires_at
    }

    pub fn state(&self) -> RequestState {
        self.state
    }

    pub fn settled_by(&self) -> Option<&DeviceId> {
        self.settled_by.as_ref()
    }

    pub fn is_pending(&self) -> bool {
        self.state == RequestState::Pending
    }

    /// Past its deadline (`expires_at <= now`), regardless of state.
    pub fn is_due(&self, now: Timestamp) -> bool {
        self.expires_at <= now
    }

    /// `pending -> confirmed | denied`, recording the answering device.
    pub fn settle(&mut self, confirmed: bool, by: DeviceId) -> Result<(), AlreadySettled> {
        if self.state != RequestState::Pending {
            return Err(AlreadySettled(self.state));
        }
        self.state = if confirmed {
            RequestState::Confirmed
        } else {
            RequestState::Denied
        };
        self.settled_by = Some(by);
        Ok(())
    }

    /// `pending -> expired`.
    pub fn expire(&mut self) -> Result<(), AlreadySettled> {
        if self.state != RequestState::Pending {
            return Err(AlreadySettled(self.state));
        }
        self.state = RequestState::Expired;
        Ok(())
    }

    /// Expires the request if it is pending and due. Returns whether it
    /// transitioned.
    pub fn expire_if_due(&mut self, now: Timestamp) -> bool {
        self.is_pending() && self.is_due(now) && self.expire().is_ok()
    }

    /// Rebuilds a request from stored fields, checking the invariants.
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        request_id: RequestId,
        user_id: UserId,
        nonce: Nonce,
        comparison_code: ComparisonCode,
        created_at: Timestamp,
        expires_at: Timestamp,
        state: RequestState,
        settled_by: Option<DeviceId>,
    ) -> Result<Self, Error> {
        let request = Self {
            request_id,
            user_id,
            nonce,
            comparison_code,
            created_at,
            expires_at,
            state,
            settled_by,
        };
        request.validate()?;
        Ok(request)
    }

    pub fn validate(&self) -> Result<(), Error> {
        if self.expires_at <= self.created_at {
            return Err(Error::InvalidArgument("expires_at must exceed created_at"));
        }
        let settled = matches!(self.state, RequestState::Confirmed | RequestState::Denied);
        if settled != self.settled_by.is_some() {
            return Err(Error::InvalidArgument(
                "settled_by must be set exactly for confirmed and denied requests",
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::collections::BTreeSet;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn user() -> UserId {
        UserId::new("alice").unwrap()
    }

    #[test]
    fn fresh_request_is_pending() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let r = create_auth_request(user(), &mut rng, 1_000, 60_000).unwrap();
        assert_eq!(r.state(), RequestState::Pending);
        assert_eq!(r.expires_at(), 61_000);
        assert!(r.comparison_code().value() <= 999);
        assert!(r.settled_by().is_none());
        r.validate().unwrap();
    }

    #[test]
    fn zero_ttl_rejected() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        assert!(matches!(
            create_auth_request(user(), &mut rng, 0, 0),
            Err(Error::InvalidArgument(_))
        ));
        assert!(create_auth_request(user(), &mut rng, u64::MAX, 1).is_err());
    }

    #[test]
    fn terminal_states_are_immutable() {
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let dev = DeviceId::new("d1").unwrap();
        let mut r = create_auth_request(user(), &mut rng, 0, 10).unwrap();
        r.settle(true, dev.clone()).unwrap();
        assert_eq!(
            r.settle(false, dev.clone()),
            Err(AlreadySettled(RequestState::Confirmed))
        );
        assert!(r.expire().is_err());
        assert!(!r.expire_if_due(100));
        assert_eq!(r.state(), RequestState::Confirmed);
        assert_eq!(r.settled_by(), Some(&dev));
    }

    #[test]
    fn expiry_leaves_settled_by_empty() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let mut r = create_auth_request(user(), &mut rng, 0, 10).unwrap();
        assert!(!r.expire_if_due(9));
        assert!(r.expire_if_due(10));
        assert_eq!(r.state(), RequestState::Expired);
        assert!(r.settled_by().is_none());
        r.validate().unwrap();
    }

    #[test]
    fn ten_thousand_nonces_distinct() {
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        let mut seen = BTreeSet::new();
        for _ in 0..10_000 {
            let r = create_auth_request(user(), &mut rng, 0, 1).unwrap();
            assert!(seen.insert(*r.nonce()));
        }
    }
}
