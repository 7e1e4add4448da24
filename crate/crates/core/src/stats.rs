//! Per-variant aggregation of measured attempts.

use num_traits::Float;

/// One measured authentication attempt.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Attempt {
    pub duration_ms: f64,
    pub success: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DurationSummary {
    /// Executed attempts.
    pub n: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub mean_duration_s: f64,
    /// Sample standard deviation (n - 1 denominator); 0 for fewer than two
    /// durations.
    pub sd_duration_s: f64,
}

/// Aggregates attempts. Durations of failed attempts enter the mean and sd
/// unless `successes_only` is set; `n` and the success rate always cover
/// every attempt.
pub fn summarize(attempts: &[Attempt], successes_only: bool) -> DurationSummary {
    let n = attempts.len();
    let successes = attempts.iter().filter(|a| a.success).count();
    let durations = || {
        attempts
            .iter()
            .filter(move |a| !successes_only || a.success)
            .map(|a| a.duration_ms / 1_000.0)
    };
    let count = durations().count();
    let mean = if count == 0 {
        0.0
    } else {
        durations().sum::<f64>() / count as f64
    };
    let sd = if count < 2 {
        0.0
    } else {
        let ss: f64 = durations().map(|d| (d - mean) * (d - mean)).sum();
        Float::sqrt(ss / (count - 1) as f64)
    };
    DurationSummary {
        n,
        successes,
        success_rate: if n == 0 { 0.0 } else { successes as f64 / n as f64 },
        mean_duration_s: mean,
        sd_duration_s: sd,
    }
}
