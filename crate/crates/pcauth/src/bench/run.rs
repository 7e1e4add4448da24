use std::collections::VecDeque;
use std::sync::Arc;
use std::time::Duration;

use pcauth_core::stats::{summarize, Attempt};
use pcauth_core::{DeviceClass, LatencyModel, UserId};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use tokio::time::Instant;

use super::plan::{StudyPlan, VariantPlan};
use super::schedule::{device_schedule, password_schedule, quantile, variant_rng};
use crate::adapter::{authenticate, AdapterConfig, AuthOutcome};
use crate::agent::{Agent, AgentOptions, AgentProfile, AttemptPlan, Behavior};
use crate::api::{HttpClient, ServiceApi};
use crate::clock::Clock;
use crate::service::{http, AuthService, ServiceConfig};

const OS_USER: &str = "bench";

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid plan: {0}")]
    Plan(String),
    #[error("service startup failed: {0}")]
    Startup(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transport {
    /// HTTP over 127.0.0.1.
    Loopback,
    /// Direct calls into the service.
    InProcess,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClockMode {
    System,
    /// Service timestamps start at 0. Combine with a paused tokio runtime
    /// and the in-process transport for fully reproducible timings.
    Virtual,
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    /// Multiplies every injected delay and the request ttl. Reported
    /// durations are divided by it again.
    pub time_scale: f64,
    pub transport: Transport,
    pub clock: ClockMode,
    /// Run the device variants in a seeded random order (password variants
    /// stay first). Reports keep plan order either way.
    pub shuffle: bool,
    /// Leave failed attempts out of the duration mean and sd.
    pub successes_only: bool,
    pub calibration_attempts: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            time_scale: 1.0,
            transport: Transport::Loopback,
            clock: ClockMode::System,
            shuffle: false,
            successes_only: false,
            calibration_attempts: 30,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantSummary {
    pub name: String,
    pub n: usize,
    pub successes: usize,
    pub failures: usize,
    pub success_rate: f64,
    pub mean_duration_s: f64,
    pub sd_duration_s: f64,
    /// Mean injected human latency, in unscaled seconds.
    pub injected_mean_s: f64,
    /// Protocol overhead measured before the variant (scaled clock, ms).
    pub calibration_overhead_ms: f64,
    /// Service calls made while the variant ran.
    pub service_calls: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub seed: u64,
    pub plan_digest: String,
    pub time_scale: f64,
    pub transport: Transport,
    pub clock: ClockMode,
    pub successes_only: bool,
    pub started_at_ms: u64,
    pub finished_at_ms: u64,
    pub complete: bool,
    /// Plan order.
    pub variants: Vec<VariantSummary>,
}

struct Harness {
    service: Arc<AuthService>,
    api: Arc<dyn ServiceApi>,
    options: RunOptions,
    ttl_ms: u64,
    _server: Option<http::RunningService>,
    _sweeper: Option<tokio::task::JoinHandle<()>>,
}

impl Harness {
    fn scaled(&self, ms: f64) -> Duration {
        Duration::from_secs_f64((ms * self.options.time_scale).max(0.0) / 1_000.0)
    }

    async fn password_attempt(&self, latency_ms: f64) -> f64 {
        let started = Instant::now();
        let wait = self.scaled(latency_ms);
        if !wait.is_zero() {
            tokio::time::sleep(wait).await;
        }
        started.elapsed().as_secs_f64() * 1_000.0
    }

    /// Calibration probes sit at evenly spaced quantiles of the variant's
    /// own latency model. They idle as long as real attempts do, so they see
    /// the same timer rounding and wake-up costs.
    fn probe_points(&self) -> Vec<f64> {
        let n = self.options.calibration_attempts;
        (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect()
    }

    /// Mean of (measured - injected) over the probe attempts, in scaled
    /// milliseconds.
    async fn password_overhead(&self, model: &LatencyModel) -> f64 {
        let probes: Vec<f64> = self.probe_points().into_iter().map(|p| quantile(model, p)).collect();
        if probes.is_empty() {
            return 0.0;
        }
        let mut total = 0.0;
        for &latency in &probes {
            total += self.password_attempt(latency).await - latency * self.options.time_scale;
        }
        total / probes.len() as f64
    }

    async fn start_agent(
        &self,
        user: &UserId,
        class: DeviceClass,
        plans: Vec<AttemptPlan>,
    ) -> Result<tokio::task::JoinHandle<()>, String> {
        let agent = Agent::enroll(
            self.api.clone(),
            user,
            "bench device",
            class,
            Behavior::Schedule(VecDeque::from(plans)),
        )
        .await
        .map_err(|e| e.to_string())?
        .with_options(AgentOptions {
            time_scale: self.options.time_scale,
            poll_wait_ms: 25_000,
        });
        Ok(tokio::spawn(agent.run()))
    }

    fn adapter(&self, user: &UserId) -> AdapterConfig {
        let mut config = AdapterConfig::new("in-process").with_user(OS_USER, user.clone());
        config.timeout_ms = self.ttl_ms;
        config
    }

    /// Runs logins against an agent replaying `plans`. Stops at the first
    /// adapter error.
    async fn device_attempts(
        &self,
        user: &UserId,
        class: DeviceClass,
        plans: Vec<AttemptPlan>,
    ) -> Result<(Vec<(f64, AuthOutcome)>, bool), String> {
        let n = plans.len();
        let agent = self.start_agent(user, class, plans).await?;
        let config = self.adapter(user);
        let mut out = Vec::with_capacity(n);
        let mut complete = true;
        for _ in 0..n {
            let report = authenticate(self.api.as_ref(), &config, OS_USER, &mut std::io::sink()).await;
            let failed = matches!(report.outcome, AuthOutcome::Error(_));
            out.push((report.duration.as_secs_f64() * 1_000.0, report.outcome));
            if failed {
                complete = false;
                break;
            }
        }
        agent.abort();
        Ok((out, complete))
    }

    async fn device_overhead(&self, idx: usize, profile: &AgentProfile) -> Result<f64, String> {
        let plans: Vec<AttemptPlan> = self
            .probe_points()
            .into_iter()
            .map(|p| AttemptPlan {
                unlock_ms: if profile.is_locked_at_rest() {
                    quantile(&profile.unlock_delay, p)
                } else {
                    0.0
                },
                confirm_ms: quantile(&profile.confirm_delay, p),
                ..AttemptPlan::instant(pcauth_core::Decision::Confirm)
            })
            .collect();
        if plans.is_empty() {
            return Ok(0.0);
        }
        let n = plans.len();
        let injected: Vec<f64> = plans.iter().map(AttemptPlan::total_ms).collect();
        let user = UserId::new(format!("bench-{idx}-calibration")).map_err(|e| e.to_string())?;
        let (measured, complete) = self.device_attempts(&user, profile.device_class, plans).await?;
        if !complete || measured.iter().any(|(_, o)| *o != AuthOutcome::Success) {
            return Err("calibration attempts did not all succeed".into());
        }
        let scale = self.options.time_scale;
        let total: f64 = measured.iter().zip(&injected).map(|((ms, _), p)| ms - p * scale).sum();
        Ok(total / n as f64)
    }

    async fn run_variant(
        &self,
        idx: usize,
        plan: &StudyPlan,
        variant: &VariantPlan,
    ) -> Result<(VariantSummary, bool), String> {
        let calls_before = self.service.counters().total();
        let mut rng = variant_rng(plan.seed, &variant.name);
        let scale = self.options.time_scale;
        let (attempts, injected, overhead_ms, complete) = if let Some(model) = &variant.password_latency_model {
            let overhead = if plan.calibrate_overhead {
                self.password_overhead(model).await
            } else {
                0.0
            };
            let model = model.shifted(-overhead / scale);
            let schedule = password_schedule(&model, variant, plan.sampling, &mut rng);
            let mut attempts = Vec::with_capacity(schedule.len());
            for a in &schedule {
                let measured = self.password_attempt(a.latency_ms).await;
                attempts.push(Attempt {
                    duration_ms: measured / scale,
                    success: !a.fails,
                });
            }
            let injected: Vec<f64> = schedule.iter().map(|a| a.latency_ms).collect();
            (attempts, injected, overhead, true)
        } else {
            let profile: &AgentProfile = variant
                .agent_profile
                .as_ref()
                .ok_or_else(|| format!("{}: no agent profile", variant.name))?;
            let overhead = if plan.calibrate_overhead {
                self.device_overhead(idx, profile).await?
            } else {
                0.0
            };
            let mut profile = profile.clone();
            profile.confirm_delay = shift(&profile.confirm_delay, -overhead / scale);
            let schedule = device_schedule(&profile, variant, plan.sampling, &mut rng);
            let injected: Vec<f64> = schedule.iter().map(AttemptPlan::total_ms).collect();
            let user = UserId::new(format!("bench-{idx}")).map_err(|e| e.to_string())?;
            let (measured, complete) = self.device_attempts(&user, profile.device_class, schedule).await?;
            let attempts = measured
                .into_iter()
                .map(|(ms, outcome)| Attempt {
                    duration_ms: ms / scale,
                    success: outcome == AuthOutcome::Success,
                })
                .collect();
            (attempts, injected, overhead, complete)
        };
        let stats = summarize(&attempts, self.options.successes_only);
        let injected_mean_s = if injected.is_empty() {
            0.0
        } else {
            injected.iter().take(attempts.len()).sum::<f64>() / attempts.len().max(1) as f64 / 1_000.0
        };
        Ok((
            VariantSummary {
                name: variant.name.clone(),
                n: stats.n,
                successes: stats.successes,
                failures: stats.n - stats.successes,
                success_rate: stats.success_rate,
                mean_duration_s: stats.mean_duration_s,
                sd_duration_s: stats.sd_duration_s,
                injected_mean_s,
                calibration_overhead_ms: overhead_ms,
                service_calls: self.service.counters().total() - calls_before,
            },
            complete,
        ))
    }
}

/// Shifts a latency model, keeping a zero model at zero when there is
/// nothing to take off.
fn shift(model: &LatencyModel, delta_ms: f64) -> LatencyModel {
    if delta_ms == 0.0 {
        *model
    } else {
        model.shifted(delta_ms)
    }
}

/// Runs every variant of `plan` sequentially, attempt by attempt.
pub async fn run_study(plan: &StudyPlan, options: &RunOptions) -> Result<RunSummary, BenchError> {
    plan.validate().map_err(BenchError::Plan)?;
    if !(options.time_scale.is_finite() && options.time_scale > 0.0) {
        return Err(BenchError::Plan("time scale must be positive".into()));
    }
    let ttl_ms = ((plan.ttl_ms as f64 * options.time_scale).round() as u64).max(1);
    let clock = match options.clock {
        ClockMode::System => Clock::system(),
        ClockMode::Virtual => Clock::starting_at(0),
    };
    let config = ServiceConfig {
        default_ttl_ms: ttl_ms,
        ..ServiceConfig::default()
    };
    let service = Arc::new(AuthService::with_clock(config, clock));
    let (api, server, sweeper): (Arc<dyn ServiceApi>, _, _) = match options.transport {
        Transport::InProcess => {
            let sweeper = service.spawn_sweeper();
            (service.clone(), None, Some(sweeper))
        }
        Transport::Loopback => {
            let running = http::serve(service.clone(), "127.0.0.1:0".parse().expect("literal address"))
                .await
                .map_err(|e| BenchError::Startup(e.to_string()))?;
            let client = HttpClient::new(&running.url()).map_err(|e| BenchError::Startup(e.to_string()))?;
            (Arc::new(client), Some(running), None)
        }
    };
    let harness = Harness {
        service: service.clone(),
        api,
        options: options.clone(),
        ttl_ms,
        _server: server,
        _sweeper: sweeper,
    };

    let mut order: Vec<usize> = (0..plan.variants.len()).collect();
    if options.shuffle {
        let (mut first, mut rest): (Vec<usize>, Vec<usize>) =
            order.iter().partition(|&&i| plan.variants[i].is_password());
        rest.shuffle(&mut variant_rng(plan.seed, "variant order"));
        first.extend(rest);
        order = first;
    }

    let started_at_ms = service.clock().now_ms();
    let mut results: Vec<Option<VariantSummary>> = vec![None; plan.variants.len()];
    let mut complete = true;
    for idx in order {
        match harness.run_variant(idx, plan, &plan.variants[idx]).await {
            Ok((summary, done)) => {
                results[idx] = Some(summary);
                if !done {
                    complete = false;
                    break;
                }
            }
            Err(e) => {
                tracing::error!("variant {} aborted: {e}", plan.variants[idx].name);
                complete = false;
                break;
            }
        }
    }
    let finished_at_ms = service.clock().now_ms();
    if let Some(server) = harness._server {
        server.shutdown();
    }
    if let Some(sweeper) = harness._sweeper {
        sweeper.abort();
    }
    Ok(RunSummary {
        seed: plan.seed,
        plan_digest: plan.digest(),
        time_scale: options.time_scale,
        transport: options.transport,
        clock: options.clock,
        successes_only: options.successes_only,
        started_at_ms,
        finished_at_ms,
        complete,
        variants: results.into_iter().flatten().collect(),
    })
}
