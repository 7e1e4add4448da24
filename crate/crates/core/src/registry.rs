//! Enrolled devices and their public keys.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand_core::{CryptoRng, RngCore};

use crate::{DeviceId, Error, PublicKey, Timestamp, UserId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum DeviceClass {
    Phone,
    Watch,
}

impl DeviceClass {
    pub fn as_str(self) -> &'static str {
        match self {
            DeviceClass::Phone => "phone",
            DeviceClass::Watch => "watch",
        }
    }
}

impl fmt::Display for DeviceClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DeviceClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "phone" => Ok(DeviceClass::Phone),
            "watch" => Ok(DeviceClass::Watch),
            _ => Err(Error::InvalidArgument("device class must be phone or watch")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeviceRecord {
    pub device_id: DeviceId,
    pub user_id: UserId,
    pub label: String,
    pub device_class: DeviceClass,
    pub public_key: PublicKey,
    pub enrolled_at: Timestamp,
}

/// Result of [`DeviceRegistry::enroll`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Enrollment {
    pub record: DeviceRecord,
    /// False when an identical `(user_id, public_key)` was already enrolled.
    pub created: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DeviceRegistry {
    devices: BTreeMap<DeviceId, DeviceRecord>,
}

impl DeviceRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registers a public key for a user. Enrolling the same key for the same
    /// user again returns the existing record.
    pub fn enroll<R: RngCore + CryptoRng>(
        &mut self,
        rng: &mut R,
        user_id: UserId,
        label: &str,
        device_class: DeviceClass,
        public_key: PublicKey,
        now: Timestamp,
    ) -> Result<Enrollment, Error> {
        if label.trim().is_empty() {
            return Err(Error::InvalidArgument("label must not be empty"));
        }
        if let Some(existing) = self
            .devices
            .values()
            .find(|d| d.user_id == user_id && d.public_key == public_key)
        {
            return Ok(Enrollment {
                record: existing.clone(),
                created: false,
            });
        }
        let device_id = loop {
            let id = DeviceId::random(rng)?;
            if !self.devices.contains_key(&id) {
                break id;
            }
        };
        let record = DeviceRecord {
            device_id: device_id.clone(),
            user_id,
            label: label.into(),
            device_class,
            public_key,
            enrolled_at: now,
        };
        self.devices.insert(device_id, record.clone());
        Ok(Enrollment { record, created: true })
    }

    /// Inserts a previously issued record verbatim.
    pub fn insert(&mut self, record: DeviceRecord) -> Result<(), Error> {
        if self.devices.contains_key(&record.device_id) {
            return Err(Error::Duplicate);
        }
        self.devices.insert(record.device_id.clone(), record);
        Ok(())
    }

    pub fn get(&self, device_id: &DeviceId) -> Option<&DeviceRecord> {
        self.devices.get(device_id)
    }

    /// The record for `device_id` if it belongs to `user_id`.
    pub fn enrolled_for(&self, device_id: &DeviceId, user_id: &UserId) -> Option<&DeviceRecord> {
        self.get(device_id).filter(|d| &d.user_id == user_id)
    }

    pub fn devices_for_user<'a>(&'a self, user_id: &'a UserId) -> impl Iterator<Item = &'a DeviceRecord> + 'a {
        self.devices.values().filter(move |d| &d.user_id == user_id)
    }

    pub fn iter(&self) -> impl Iterator<Item = &DeviceRecord> {
        self.devices.values()
    }

    pub fn len(&self) -> usize {
        self.devices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.devices.is_empty()
    }

    pub fn user_ids(&self) -> Vec<&UserId> {
        let mut users: Vec<&UserId> = self.devices.values().map(|d| &d.user_id).collect();
        users.sort();
        users.dedup();
        users
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::KeyPair;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn enrollment_is_idempotent_per_user_and_key() {
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let key = KeyPair::generate(&mut rng).unwrap().public_key();
        let alice = UserId::new("alice").unwrap();
        let mut reg = DeviceRegistry::new();
        let first = reg
            .enroll(&mut rng, alice.clone(), "pixel", DeviceClass::Phone, key, 1)
            .unwrap();
        assert!(first.created);
        let again = reg
            .enroll(&mut rng, alice.clone(), "pixel", DeviceClass::Phone, key, 2)
            .unwrap();
        assert!(!again.created);
        assert_eq!(first.record, again.record);

        // same key, different user: a separate enrollment
        let bob = UserId::new("bob").unwrap();
        let other = reg.enroll(&mut rng, bob, "pixel", DeviceClass::Phone, key, 3).unwrap();
        assert!(other.created);
        assert_ne!(other.record.device_id, first.record.device_id);
        assert_eq!(reg.len(), 2);
        assert!(reg.enrolled_for(&first.record.device_id, &alice).is_some());
        assert!(reg.enrolled_for(&other.record.device_id, &alice).is_none());
    }

    #[test]
    fn empty_label_rejected() {
        let mut rng = ChaCha20Rng::seed_from_u64(6);
        let key = KeyPair::generate(&mut rng).unwrap().public_key();
        let mut reg = DeviceRegistry::new();
        let err = reg
            .enroll(&mut rng, UserId::new("a").unwrap(), "  ", DeviceClass::Watch, key, 0)
            .unwrap_err();
        assert!(matches!(err, Error::InvalidArgument(_)));
    }

    #[test]
    fn class_parses() {
        assert_eq!("watch".parse::<DeviceClass>().unwrap(), DeviceClass::Watch);
        assert!("tablet".parse::<DeviceClass>().is_err());
    }
}
