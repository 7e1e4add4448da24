use std::collections::HashSet;
use std::path::Path;

use pcauth_core::{DeviceClass, LatencyModel};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::agent::{AgentProfile, ConfirmMethod, DecisionPolicy};
use crate::error::LoadError;

/// How per-attempt latencies and failures are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampling {
    /// Latencies from one quantile stratum each (then shuffled), and exactly
    /// `round(failure_prob * n)` failures at random positions.
    #[default]
    Stratified,
    /// Independent draws and independent Bernoulli failures.
    Independent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariantPlan {
    pub name: String,
    /// Set for device variants, which run end to end through the service.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub agent_profile: Option<AgentProfile>,
    /// Set for the password variant: a pure latency sample, no network.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub password_latency_model: Option<LatencyModel>,
    #[serde(default = "default_attempts_per_series")]
    pub attempts_per_series: usize,
    #[serde(default = "default_series")]
    pub series: usize,
    #[serde(default)]
    pub failure_prob: f64,
}

fn default_attempts_per_series() -> usize {
    8
}

fn default_series() -> usize {
    1
}

fn default_ttl_ms() -> u64 {
    60_000
}

fn default_true() -> bool {
    true
}

impl VariantPlan {
    pub fn attempts(&self) -> usize {
        self.attempts_per_series * self.series
    }

    pub fn is_password(&self) -> bool {
        self.password_latency_model.is_some()
    }

    fn validate(&self) -> Result<(), String> {
        let name = &self.name;
        if name.trim().is_empty() {
            return Err("variant name must not be empty".into());
        }
        match (&self.agent_profile, &self.password_latency_model) {
            (Some(p), None) => p.validate().map_err(|e| format!("{name}: {e}"))?,
            (None, Some(m)) => m.validate().map_err(|e| format!("{name}: {e}"))?,
            _ => {
                return Err(format!(
                    "{name}: exactly one of agent_profile and password_latency_model is required"
                ))
            }
        }
        if self.attempts_per_series == 0 || self.series == 0 {
            return Err(format!("{name}: attempts_per_series and series must be >= 1"));
        }
        if !(0.0..=1.0).contains(&self.failure_prob) {
            return Err(format!("{name}: failure_prob must be within [0, 1]"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyPlan {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_ttl_ms")]
    pub ttl_ms: u64,
    #[serde(default)]
    pub sampling: Sampling,
    /// Measure the protocol overhead before each variant and take it off the
    /// injected human latency.
    #[serde(default = "default_true")]
    pub calibrate_overhead: bool,
    #[serde(default)]
    pub variants: Vec<VariantPlan>,
}

impl StudyPlan {
    pub fn validate(&self) -> Result<(), String> {
        if self.ttl_ms == 0 {
            return Err("ttl_ms must be positive".into());
        }
        let mut names = HashSet::new();
        for v in &self.variants {
            v.validate()?;
            if !names.insert(v.name.as_str()) {
                return Err(format!("duplicate variant name {:?}", v.name));
            }
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, LoadError> {
        let text = std::fs::read_to_string(path).map_err(|source| LoadError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let plan: Self = toml::from_str(&text).map_err(|e| LoadError::Parse {
            path: path.display().to_string(),
            detail: e.to_string(),
        })?;
        plan.validate().map_err(|detail| LoadError::Invalid {
            path: path.display().to_string(),
            detail,
        })?;
        Ok(plan)
    }

    /// Hex SHA-256 of the plan's JSON form.
    pub fn digest(&self) -> String {
        let json = serde_json::to_vec(self).unwrap_or_default();
        Sha256::digest(&json).iter().map(|b| format!("{b:02x}")).collect()
    }

    /// The five variants of the reference study, 30 series of 8 attempts
    /// each. Latencies are normal with the reference mean and sd per variant;
    /// overhead calibration shifts them down by the measured protocol cost.
    pub fn reference_study(seed: u64) -> Self {
        fn device(class: DeviceClass, method: ConfirmMethod, mean_ms: f64, sd_ms: f64) -> AgentProfile {
            AgentProfile {
                device_class: class,
                locked_at_rest: None,
                unlock_delay: LatencyModel::Zero,
                confirm_method: method,
                confirm_delay: LatencyModel::Normal { mean_ms, sd_ms },
                biometric_failure_prob: 0.0,
                decision_policy: DecisionPolicy::AutoConfirm,
            }
        }
        let variant = |name: &str, failure_prob: f64| VariantPlan {
            name: name.into(),
            agent_profile: None,
            password_latency_model: None,
            attempts_per_series: 8,
            series: 30,
            failure_prob,
        };
        use ConfirmMethod::*;
        use DeviceClass::*;
        Self {
            seed,
            ttl_ms: 60_000,
            sampling: Sampling::Stratified,
            calibrate_overhead: true,
            variants: vec![
                VariantPlan {
                    password_latency_model: Some(LatencyModel::Normal {
                        mean_ms: 4_600.0,
                        sd_ms: 1_800.0,
                    }),
                    ..variant("Password", 0.03)
                },
                VariantPlan {
                    agent_profile: Some(device(Phone, Button, 6_600.0, 2_300.0)),
                    ..variant("Phone (Button)", 0.0)
                },
                VariantPlan {
                    agent_profile: Some(device(Phone, Biometric, 7_400.0, 2_000.0)),
                    ..variant("Phone (Biometric)", 0.02)
                },
                VariantPlan {
                    agent_profile: Some(device(Watch, Button, 4_500.0, 2_000.0)),
                    ..variant("Watch (Button)", 0.04)
                },
                VariantPlan {
                    agent_profile: Some(device(Watch, Biometric, 4_600.0, 1_500.0)),
                    ..variant("Watch (Biometric)", 0.02)
                },
            ],
        }
    }
}
