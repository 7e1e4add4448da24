//! Opaque identifiers.
//!
//! Request and device ids are embedded in the signed payload with `0x00`
//! separators, so none of the ids may be empty or contain a NUL byte.

use alloc::string::String;
use core::fmt;

use rand_core::{CryptoRng, RngCore};

use crate::Error;

const RANDOM_ID_BYTES: usize = 16;

fn random_hex<R: RngCore + CryptoRng>(rng: &mut R) -> Result<String, Error> {
    const HEX: &[u8; 16] = b"0123456789abcdef";
    let mut raw = [0u8; RANDOM_ID_BYTES];
    rng.try_fill_bytes(&mut raw).map_err(|_| Error::EntropyUnavailable)?;
    let mut out = String::with_capacity(RANDOM_ID_BYTES * 2);
    for b in raw {
        out.push(HEX[(b >> 4) as usize] as char);
        out.push(HEX[(b & 0x0f) as usize] as char);
    }
    Ok(out)
}

macro_rules! opaque_id {
    ($(#[$meta:meta])* $name:ident, $what:literal) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
        #[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
        #[cfg_attr(feature = "serde", serde(try_from = "String", into = "String"))]
        pub struct $name(String);

        impl $name {
            pub fn new(value: impl Into<String>) -> Result<Self, Error> {
                let value = value.into();
                if value.is_empty() {
                    return Err(Error::InvalidId(concat!($what, " is empty")));
                }
                if value.as_bytes().contains(&0) {
                    return Err(Error::InvalidId(concat!($what, " contains NUL")));
                }
                Ok(Self(value))
            }

            /// 128 random bits, hex encoded.
            pub fn random<R: RngCore + CryptoRng>(rng: &mut R) -> Result<Self, Error> {
                random_hex(rng).map(Self)
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl TryFrom<String> for $name {
            type Error = Error;

            fn try_from(value: String) -> Result<Self, Error> {
                Self::new(value)
            }
        }

        impl TryFrom<&str> for $name {
            type Error = Error;

            fn try_from(value: &str) -> Result<Self, Error> {
                Self::new(value)
            }
        }

        impl From<$name> for String {
            fn from(id: $name) -> String {
                id.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl AsRef<str> for $name {
            fn as_ref(&self) -> &str {
                &self.0
            }
        }
    };
}

opaque_id!(
    /// Identifies one authentication attempt.
    RequestId,
    "request id"
);
opaque_id!(
    /// Identifies one enrolled authenticator.
    DeviceId,
    "device id"
);
opaque_id!(
    /// The service-side account a PC user maps onto.
    UserId,
    "user id"
);
