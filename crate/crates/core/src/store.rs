//! In-memory request store.
//!
//! All mutation goes through `&mut self`, so wrapping the store in a single
//! lock gives linearizable transitions.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::{verify_response, AuthRequest, DeviceRegistry, Error, RequestId, SignedResponse, Timestamp, Verdict};

#[derive(Debug, Clone, Default)]
pub struct RequestStore {
    requests: BTreeMap<RequestId, AuthRequest>,
}

impl RequestStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, request: AuthRequest) -> Result<(), Error> {
        if self.requests.contains_key(request.request_id()) {
            return Err(Error::Duplicate);
        }
        self.requests.insert(request.request_id().clone(), request);
        Ok(())
    }

    pub fn get(&self, id: &RequestId) -> Option<&AuthRequest> {
        self.requests.get(id)
    }

    /// Reads a request after expiring it if it is due.
    pub fn read(&mut self, id: &RequestId, now: Timestamp) -> Option<&AuthRequest> {
        let request = self.requests.get_mut(id)?;
        request.expire_if_due(now);
        Some(request)
    }

    /// Verifies `response` against the request it names. `None` if the
    /// request id is unknown.
    pub fn submit(&mut self, registry: &DeviceRegistry, response: &SignedResponse, now: Timestamp) -> Option<Verdict> {
        let request = self.requests.get_mut(&response.request_id)?;
        Some(verify_response(registry, request, response, now))
    }

    /// Expires every pending request whose deadline is at or before `now`
    /// and returns exactly those ids.
    pub fn expire_pending(&mut self, now: Timestamp) -> Vec<RequestId> {
        self.requests
            .values_mut()
            .filter_map(|r| r.expire_if_due(now).then(|| r.request_id().clone()))
            .collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &AuthRequest> {
        self.requests.values()
    }

    pub fn len(&self) -> usize {
        self.requests.len()
    }

    pub fn is_empty(&self) -> bool {
        self.requests.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{create_auth_request, DeviceId, RequestState, UserId};
    use alloc::collections::BTreeSet;
    use rand_chacha::rand_core::{RngCore, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn empty_store_expires_nothing() {
        assert!(RequestStore::new().expire_pending(u64::MAX).is_empty());
    }

    #[test]
    fn single_due_request_expires() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let mut store = RequestStore::new();
        let r = create_auth_request(UserId::new("u").unwrap(), &mut rng, 0, 5).unwrap();
        let id = r.request_id().clone();
        store.insert(r).unwrap();
        assert_eq!(store.expire_pending(5), core::slice::from_ref(&id));
        assert_eq!(store.get(&id).unwrap().state(), RequestState::Expired);
        assert!(store.expire_pending(6).is_empty());
    }

    #[test]
    fn mixed_store_matches_filter_oracle() {
        let mut rng = ChaCha20Rng::seed_from_u64(21);
        let user = UserId::new("u").unwrap();
        let dev = DeviceId::new("d").unwrap();
        for round in 0..20 {
            let mut store = RequestStore::new();
            for _ in 0..50 {
                let created = rng.next_u64() % 1_000;
                let ttl = 1 + rng.next_u64() % 1_000;
                let mut r = create_auth_request(user.clone(), &mut rng, created, ttl).unwrap();
                match rng.next_u32() % 4 {
                    0 => r.settle(true, dev.clone()).unwrap(),
                    1 => r.settle(false, dev.clone()).unwrap(),
                    2 => r.expire().unwrap(),
                    _ => {}
                }
                store.insert(r).unwrap();
            }
            let now = 500 + rng.next_u64() % 1_000;
            let oracle: BTreeSet<RequestId> = store
                .iter()
                .filter(|r| r.state() == RequestState::Pending && r.expires_at() <= now)
                .map(|r| r.request_id().clone())
                .collect();
            let before: BTreeMap<RequestId, RequestState> =
                store.iter().map(|r| (r.request_id().clone(), r.state())).collect();
            let got: BTreeSet<RequestId> = store.expire_pending(now).into_iter().collect();
            assert_eq!(got, oracle, "round {round}");
            for r in store.iter() {
                let prev = before[r.request_id()];
                if oracle.contains(r.request_id()) {
                    assert_eq!(r.state(), RequestState::Expired);
                } else {
                    assert_eq!(r.state(), prev);
                }
            }
        }
    }

    #[test]
    fn read_applies_expiry() {
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let mut store = RequestStore::new();
        let r = create_auth_request(UserId::new("u").unwrap(), &mut rng, 0, 5).unwrap();
        let id = r.request_id().clone();
        store.insert(r.clone()).unwrap();
        assert_eq!(store.insert(r), Err(Error::Duplicate));
        assert_eq!(store.read(&id, 4).unwrap().state(), RequestState::Pending);
        assert_eq!(store.read(&id, 5).unwrap().state(), RequestState::Expired);
    }
}
