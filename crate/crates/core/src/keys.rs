//! Ed25519 device keys.

use core::fmt;

use ed25519_dalek::{Signer, SigningKey, VerifyingKey};
use rand_core::{CryptoRng, RngCore};

use crate::Error;

pub const PUBLIC_KEY_LEN: usize = 32;
pub const SECRET_KEY_LEN: usize = 32;
pub const SIGNATURE_LEN: usize = 64;

/// A device's public key. Always a valid curve point.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct PublicKey([u8; PUBLIC_KEY_LEN]);

impl PublicKey {
    pub fn from_bytes(bytes: &[u8]) -> Result<Self, Error> {
        let raw: [u8; PUBLIC_KEY_LEN] = bytes.try_into().map_err(|_| Error::InvalidKey)?;
        VerifyingKey::from_bytes(&raw).map_err(|_| Error::InvalidKey)?;
        Ok(Self(raw))
    }

    pub fn as_bytes(&self) -> &[u8; PUBLIC_KEY_LEN] {
        &self.0
    }

    /// Strict Ed25519 verification (rejects small-order keys and
    /// non-canonical signatures).
    pub fn verify(&self, message: &[u8], signature: &Signature) -> bool {
        let Ok(key) = VerifyingKey::from_bytes(&self.0) else {
            return false;
        };
        let sig = ed25519_dalek::Signature::from_bytes(&signature.0);
        key.verify_strict(message, &sig).is_ok()
    }
}

impl fmt::Debug for PublicKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PublicKey(")?;
        for b in &self.0[..8] {
            write!(f, "{b:02x}")?;
        }
        write!(f, "..)")
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Signature([u8; SIGNATURE_LEN]);

impl Signature {
    pub fn from_bytes(bytes: &[u8]) -> Result<Self, Error> {
        let raw: [u8; SIGNATURE_LEN] = bytes
            .try_into()
            .map_err(|_| Error::InvalidArgument("signature must be 64 bytes"))?;
        Ok(Self(raw))
    }

    pub fn as_bytes(&self) -> &[u8; SIGNATURE_LEN] {
        &self.0
    }

    /// Copy with bit `bit` (0..512) inverted.
    pub fn with_bit_flipped(&self, bit: usize) -> Self {
        let mut raw = self.0;
        raw[bit / 8] ^= 1 << (bit % 8);
        Self(raw)
    }
}

impl fmt::Debug for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Signature(")?;
        for b in &self.0[..8] {
            write!(f, "{b:02x}")?;
        }
        write!(f, "..)")
    }
}

/// A device's signing key together with its public half.
#[derive(Clone)]
pub struct KeyPair {
    signing: SigningKey,
}

impl KeyPair {
    pub fn generate<R: RngCore + CryptoRng>(rng: &mut R) -> Result<Self, Error> {
        let mut secret = [0u8; SECRET_KEY_LEN];
        rng.try_fill_bytes(&mut secret).map_err(|_| Error::EntropyUnavailable)?;
        let pair = Self {
            signing: SigningKey::from_bytes(&secret),
        };
        secret.fill(0);
        Ok(pair)
    }

    pub fn from_secret_bytes(bytes: &[u8]) -> Result<Self, Error> {
        let raw: [u8; SECRET_KEY_LEN] = bytes.try_into().map_err(|_| Error::InvalidKey)?;
        Ok(Self {
            signing: SigningKey::from_bytes(&raw),
        })
    }

    pub fn secret_bytes(&self) -> [u8; SECRET_KEY_LEN] {
        self.signing.to_bytes()
    }

    pub fn public_key(&self) -> PublicKey {
        PublicKey(self.signing.verifying_key().to_bytes())
    }

    pub fn sign(&self, message: &[u8]) -> Signature {
        Signature(self.signing.sign(message).to_bytes())
    }
}

impl fmt::Debug for KeyPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KeyPair")
            .field("public_key", &self.public_key())
            .finish_non_exhaustive()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    struct DeadRng;

    impl RngCore for DeadRng {
        fn next_u32(&mut self) -> u32 {
            unreachable!()
        }
        fn next_u64(&mut self) -> u64 {
            unreachable!()
        }
        fn fill_bytes(&mut self, _: &mut [u8]) {
            unreachable!()
        }
        fn try_fill_bytes(&mut self, _: &mut [u8]) -> Result<(), rand_core::Error> {
            Err(rand_core::Error::from(
                core::num::NonZeroU32::new(rand_core::Error::CUSTOM_START).unwrap(),
            ))
        }
    }
    impl CryptoRng for DeadRng {}

    #[test]
    fn sign_verify_round_trip() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let pair = KeyPair::generate(&mut rng).unwrap();
        let sig = pair.sign(b"abc");
        assert!(pair.public_key().verify(b"abc", &sig));
        assert!(!pair.public_key().verify(b"abd", &sig));
    }

    #[test]
    fn independent_entropy_gives_distinct_keys() {
        let a = KeyPair::generate(&mut ChaCha20Rng::seed_from_u64(1)).unwrap();
        let b = KeyPair::generate(&mut ChaCha20Rng::seed_from_u64(2)).unwrap();
        assert_ne!(a.public_key(), b.public_key());
    }

    #[test]
    fn thousand_keys_pairwise_distinct() {
        let mut rng = ChaCha20Rng::seed_from_u64(99);
        let keys: Vec<PublicKey> = (0..1000)
            .map(|_| KeyPair::generate(&mut rng).unwrap().public_key())
            .collect();
        for i in 0..keys.len() {
            for j in i + 1..keys.len() {
                assert_ne!(keys[i], keys[j], "collision at {i},{j}");
            }
        }
    }

    #[test]
    fn public_key_derives_from_secret() {
        let pair = KeyPair::generate(&mut ChaCha20Rng::seed_from_u64(3)).unwrap();
        let again = KeyPair::from_secret_bytes(&pair.secret_bytes()).unwrap();
        assert_eq!(pair.public_key(), again.public_key());
    }

    #[test]
    fn dead_entropy_is_an_error() {
        assert_eq!(KeyPair::generate(&mut DeadRng).unwrap_err(), Error::EntropyUnavailable);
    }

    #[test]
    fn malformed_keys_rejected() {
        assert_eq!(KeyPair::from_secret_bytes(&[0u8; 31]).unwrap_err(), Error::InvalidKey);
        assert_eq!(PublicKey::from_bytes(&[1u8; 33]).unwrap_err(), Error::InvalidKey);
        assert!(Signature::from_bytes(&[0u8; 63]).is_err());
    }
}
