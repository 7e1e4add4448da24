//! The 3-digit comparison code shown on both the PC and the device.
//!
//! Display only: the code is not part of the signed payload.

use core::fmt;
use core::str::FromStr;

use rand_core::RngCore;

use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ComparisonCode(u16);

impl ComparisonCode {
    pub const MAX: u16 = 999;

    pub fn new(value: u16) -> Result<Self, Error> {
        if value > Self::MAX {
            return Err(Error::InvalidArgument("comparison code above 999"));
        }
        Ok(Self(value))
    }

    /// Uniform over `0..=999`.
    pub fn random<R: RngCore + ?Sized>(rng: &mut R) -> Self {
        // rejection sample 10 bits; 1000/1024 acceptance
        loop {
            let v = (rng.next_u32() & 0x3ff) as u16;
            if v <= Self::MAX {
                return Self(v);
            }
        }
    }

    pub fn value(self) -> u16 {
        self.0
    }

    /// Zero-padded ASCII digits.
    pub fn render(self) -> [u8; 3] {
        let v = self.0;
        [
            b'0' + (v / 100) as u8,
            b'0' + (v / 10 % 10) as u8,
            b'0' + (v % 10) as u8,
        ]
    }
}

impl fmt::Display for ComparisonCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = self.render();
        // render() only yields ASCII digits
        f.write_str(core::str::from_utf8(&digits).unwrap_or("???"))
    }
}

impl FromStr for ComparisonCode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let bytes = s.as_bytes();
        if bytes.len() != 3 || !bytes.iter().all(u8::is_ascii_digit) {
            return Err(Error::InvalidArgument("comparison code must be 3 digits"));
        }
        let v = bytes.iter().fold(0u16, |acc, b| acc * 10 + u16::from(b - b'0'));
        Ok(Self(v))
    }
}

#[cfg(feature = "serde")]
impl serde::Serialize for ComparisonCode {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

#[cfg(feature = "serde")]
impl<'de> serde::Deserialize<'de> for ComparisonCode {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = <alloc::string::String as serde::Deserialize>::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
