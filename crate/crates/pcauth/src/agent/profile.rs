use pcauth_core::{Decision, DeviceClass, LatencyModel};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::error::LoadError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConfirmMethod {
    Button,
    Biometric,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DecisionPolicy {
    #[default]
    AutoConfirm,
    AutoDeny,
    /// Answers in order, cycling when the list runs out.
    Scripted {
        decisions: Vec<Decision>,
    },
}

/// How a simulated device (and its wearer) reacts to a request.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentProfile {
    pub device_class: DeviceClass,
    /// Defaults by class: phones rest locked, watches unlocked on the wrist.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub locked_at_rest: Option<bool>,
    #[serde(default)]
    pub unlock_delay: LatencyModel,
    pub confirm_method: ConfirmMethod,
    #[serde(default)]
    pub confirm_delay: LatencyModel,
    #[serde(default)]
    pub biometric_failure_prob: f64,
    #[serde(default)]
    pub decision_policy: DecisionPolicy,
}

impl AgentProfile {
    /// Zero-latency profile that confirms everything.
    pub fn instant(device_class: DeviceClass, confirm_method: ConfirmMethod) -> Self {
        Self {
            device_class,
            locked_at_rest: None,
            unlock_delay: LatencyModel::Zero,
            confirm_method,
            confirm_delay: LatencyModel::Zero,
            biometric_failure_prob: 0.0,
            decision_policy: DecisionPolicy::AutoConfirm,
        }
    }

    pub fn is_locked_at_rest(&self) -> bool {
        self.locked_at_rest.unwrap_or(self.device_class == DeviceClass::Phone)
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(0.0..=1.0).contains(&self.biometric_failure_prob) {
            return Err("biometric_failure_prob must be within [0, 1]".into());
        }
        self.unlock_delay.validate().map_err(|e| format!("unlock_delay: {e}"))?;
        self.confirm_delay
            .validate()
            .map_err(|e| format!("confirm_delay: {e}"))?;
        if let DecisionPolicy::Scripted { decisions } = &self.decision_policy {
            if decisions.is_empty() {
                return Err("scripted decision policy needs at least one decision".into());
            }
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, LoadError> {
        let text = std::fs::read_to_string(path).map_err(|source| LoadError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let profile: Self = toml::from_str(&text).map_err(|e| LoadError::Parse {
            path: path.display().to_string(),
            detail: e.to_string(),
        })?;
        profile.validate().map_err(|detail| LoadError::Invalid {
            path: path.display().to_string(),
            detail,
        })?;
        Ok(profile)
    }
}

/// The concrete behavior for one request, in milliseconds of simulated
/// human time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttemptPlan {
    pub unlock_ms: f64,
    pub confirm_ms: f64,
    /// Second confirmation after a failed biometric check.
    pub retry_ms: Option<f64>,
    pub decision: Decision,
}

impl AttemptPlan {
    pub fn instant(decision: Decision) -> Self {
        Self {
            unlock_ms: 0.0,
            confirm_ms: 0.0,
            retry_ms: None,
            decision,
        }
    }

    pub fn total_ms(&self) -> f64 {
        self.unlock_ms + self.confirm_ms + self.retry_ms.unwrap_or(0.0)
    }
}

/// Draws attempt plans from a profile.
#[derive(Debug, Clone)]
pub struct ProfileSampler {
    profile: AgentProfile,
    scripted_next: usize,
}

impl ProfileSampler {
    pub fn new(profile: AgentProfile) -> Self {
        Self {
            profile,
            scripted_next: 0,
        }
    }

    pub fn profile(&self) -> &AgentProfile {
        &self.profile
    }

    fn next_decision(&mut self) -> Decision {
        match &self.profile.decision_policy {
            DecisionPolicy::AutoConfirm => Decision::Confirm,
            DecisionPolicy::AutoDeny => Decision::Deny,
            DecisionPolicy::Scripted { decisions } if decisions.is_empty() => Decision::Deny,
            DecisionPolicy::Scripted { decisions } => {
                let d = decisions[self.scripted_next % decisions.len()];
                self.scripted_next += 1;
                d
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&mut self, rng: &mut R) -> AttemptPlan {
        let p = &self.profile;
        let unlock_ms = if p.is_locked_at_rest() {
            p.unlock_delay.sample(rng)
        } else {
            0.0
        };
        let confirm_ms = p.confirm_delay.sample(rng);
        let decision = self.next_decision();
        let p = &self.profile;
        let mut retry_ms = None;
        if decision == Decision::Confirm
            && p.confirm_method == ConfirmMethod::Biometric
            && rng.gen::<f64>() < p.biometric_failure_prob
        {
            // a failed check is a hold released early; one retry follows
            let hold = rng.gen_range(0..pcauth_core::biometric::HOLD_THRESHOLD_MS);
            debug_assert_eq!(
                pcauth_core::biometric::simulate_biometric_hold(hold),
                pcauth_core::biometric::HoldOutcome::Fail
            );
            retry_ms = Some(p.confirm_delay.sample(rng));
        }
        AttemptPlan {
            unlock_ms,
            confirm_ms,
            retry_ms,
            decision,
        }
    }
}
