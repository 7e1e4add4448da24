use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::Parser;
use pcauth::agent::{Agent, AgentOptions, AgentProfile, Behavior, ConfirmMethod, KeyStore};
use pcauth::api::{HttpClient, ServiceApi};
use pcauth_core::{DeviceClass, UserId};
use rand::RngCore;

/// Headless authenticator: holds a device key, long-polls the service and
/// answers requests the way the profile says a person would.
#[derive(Parser)]
#[command(version)]
struct Cli {
    /// Agent profile (TOML). Defaults to an instant, always-confirming phone.
    #[arg(long)]
    profile: Option<PathBuf>,
    /// Key file; created with a fresh key pair on first start.
    #[arg(long)]
    keys: PathBuf,
    #[arg(long, default_value = "http://127.0.0.1:7878")]
    service_url: String,
    /// Seed for latency and failure draws (random if omitted).
    #[arg(long)]
    seed: Option<u64>,
    /// Service user to enroll for. Needed on first start.
    #[arg(long, value_parser = parse_user)]
    user: Option<UserId>,
    #[arg(long, default_value = "pcauth-agent")]
    label: String,
    /// Multiplies every simulated delay.
    #[arg(long, default_value_t = 1.0)]
    time_scale: f64,
}

fn parse_user(s: &str) -> Result<UserId, String> {
    UserId::new(s).map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()))
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();
    match tokio::runtime::Runtime::new()
        .expect("tokio runtime")
        .block_on(run(cli))
    {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("pcauth-agent: {e}");
            ExitCode::FAILURE
        }
    }
}

async fn run(cli: Cli) -> Result<(), String> {
    if !(cli.time_scale.is_finite() && cli.time_scale >= 0.0) {
        return Err("--time-scale must be a non-negative number".into());
    }
    let profile = match &cli.profile {
        Some(path) => AgentProfile::load(path).map_err(|e| e.to_string())?,
        None => AgentProfile::instant(DeviceClass::Phone, ConfirmMethod::Button),
    };
    let (mut store, created) = KeyStore::load_or_create(&cli.keys).map_err(|e| e.to_string())?;
    if created {
        tracing::info!("generated a new key pair in {}", cli.keys.display());
    }
    let user = cli
        .user
        .or_else(|| store.user_id.clone())
        .ok_or("no enrolled user in the key file; pass --user")?;
    let api: Arc<dyn ServiceApi> = Arc::new(HttpClient::new(&cli.service_url).map_err(|e| e.to_string())?);
    // enrollment is idempotent per (user, key), so re-enrolling on every
    // start also covers a service that lost its state
    let info = api
        .enroll_device(&user, &cli.label, profile.device_class, &store.keys.public_key())
        .await
        .map_err(|e| format!("enrollment failed: {e}"))?;
    if store.device_id.as_ref() != Some(&info.device_id) || store.user_id.as_ref() != Some(&user) {
        store.device_id = Some(info.device_id.clone());
        store.user_id = Some(user.clone());
        store
            .save(&cli.keys)
            .map_err(|e| format!("cannot update {}: {e}", cli.keys.display()))?;
    }
    tracing::info!(device = %info.device_id, user = %user, "enrolled");
    let seed = cli.seed.unwrap_or_else(|| rand::rngs::OsRng.next_u64());
    let agent = Agent::new(
        api,
        store.keys.clone(),
        info.device_id,
        Behavior::sampled(profile, seed),
    )
    .with_options(AgentOptions {
        time_scale: cli.time_scale,
        ..AgentOptions::default()
    });
    tokio::select! {
        _ = agent.run() => {}
        _ = tokio::signal::ctrl_c() => {}
    }
    Ok(())
}
