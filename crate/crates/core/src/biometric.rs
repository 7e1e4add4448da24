//! Hold-to-verify fingerprint stand-in: the press must last at least
//! [`HOLD_THRESHOLD_MS`].

pub const HOLD_THRESHOLD_MS: u64 = 400;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HoldOutcome {
    Confirm,
    Fail,
}

pub fn simulate_biometric_hold(hold_ms: u64) -> HoldOutcome {
    if hold_ms >= HOLD_THRESHOLD_MS {
        HoldOutcome::Confirm
    } else {
        HoldOutcome::Fail
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn threshold() {
        assert_eq!(simulate_biometric_hold(400), HoldOutcome::Confirm);
        assert_eq!(simulate_biometric_hold(399), HoldOutcome::Fail);
        assert_eq!(simulate_biometric_hold(0), HoldOutcome::Fail);
        assert_eq!(simulate_biometric_hold(1000), HoldOutcome::Confirm);
    }
}
