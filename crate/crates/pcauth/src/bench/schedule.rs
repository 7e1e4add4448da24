//! Per-attempt schedules: what each simulated attempt will inject.

use pcauth_core::{Decision, LatencyModel};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};
use statrs::distribution::{ContinuousCDF, Normal};

use super::plan::{Sampling, VariantPlan};
use crate::agent::{AgentProfile, AttemptPlan, ConfirmMethod};

/// Generator for one variant, independent of the order variants run in.
pub fn variant_rng(seed: u64, variant: &str) -> ChaCha20Rng {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(variant.as_bytes());
    let digest = h.finalize();
    let mut key = [0u8; 32];
    key.copy_from_slice(&digest);
    ChaCha20Rng::from_seed(key)
}

/// Inverse CDF of the model (normal draws clamped at zero).
pub fn quantile(model: &LatencyModel, p: f64) -> f64 {
    match *model {
        LatencyModel::Zero => 0.0,
        LatencyModel::Constant { value_ms } => value_ms.max(0.0),
        LatencyModel::Normal { mean_ms, sd_ms } => {
            if sd_ms == 0.0 {
                return mean_ms.max(0.0);
            }
            match Normal::new(mean_ms, sd_ms) {
                Ok(n) => n.inverse_cdf(p.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON)).max(0.0),
                Err(_) => mean_ms.max(0.0),
            }
        }
    }
}

/// `n` draws from `model`.
pub fn draw(model: &LatencyModel, n: usize, sampling: Sampling, rng: &mut ChaCha20Rng) -> Vec<f64> {
    match sampling {
        Sampling::Independent => (0..n).map(|_| model.sample(rng)).collect(),
        Sampling::Stratified => {
            let mut out: Vec<f64> = (0..n)
                .map(|i| quantile(model, (i as f64 + rng.gen::<f64>()) / n as f64))
                .collect();
            out.shuffle(rng);
            out
        }
    }
}

/// Which attempts fail.
pub fn failures(n: usize, prob: f64, sampling: Sampling, rng: &mut ChaCha20Rng) -> Vec<bool> {
    match sampling {
        Sampling::Independent => (0..n).map(|_| rng.gen::<f64>() < prob).collect(),
        Sampling::Stratified => {
            let count = ((prob * n as f64).round() as usize).min(n);
            let mut out = vec![false; n];
            out[..count].fill(true);
            out.shuffle(rng);
            out
        }
    }
}

/// One password attempt.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PasswordAttempt {
    pub latency_ms: f64,
    pub fails: bool,
}

pub fn password_schedule(
    model: &LatencyModel,
    plan: &VariantPlan,
    sampling: Sampling,
    rng: &mut ChaCha20Rng,
) -> Vec<PasswordAttempt> {
    let n = plan.attempts();
    let latencies = draw(model, n, sampling, rng);
    let fails = failures(n, plan.failure_prob, sampling, rng);
    latencies
        .into_iter()
        .zip(fails)
        .map(|(latency_ms, fails)| PasswordAttempt { latency_ms, fails })
        .collect()
}

/// Agent plans for a device variant. A failing attempt is answered with a
/// deny after the same human delay.
pub fn device_schedule(
    profile: &AgentProfile,
    plan: &VariantPlan,
    sampling: Sampling,
    rng: &mut ChaCha20Rng,
) -> Vec<AttemptPlan> {
    let n = plan.attempts();
    let unlock = if profile.is_locked_at_rest() {
        draw(&profile.unlock_delay, n, sampling, rng)
    } else {
        vec![0.0; n]
    };
    let confirm = draw(&profile.confirm_delay, n, sampling, rng);
    let fails = failures(n, plan.failure_prob, sampling, rng);
    (0..n)
        .map(|i| {
            let decision = if fails[i] { Decision::Deny } else { Decision::Confirm };
            let retry_ms = (decision == Decision::Confirm
                && profile.confirm_method == ConfirmMethod::Biometric
                && rng.gen::<f64>() < profile.biometric_failure_prob)
                .then(|| profile.confirm_delay.sample(rng));
            AttemptPlan {
                unlock_ms: unlock[i],
                confirm_ms: confirm[i],
                retry_ms,
                decision,
            }
        })
        .collect()
}
