use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::Parser;
use pcauth::clock::Clock;
use pcauth::service::{http, AuthService, ServiceConfig, LISTEN_ENV};

/// Auth service: device registry, request store and the HTTP API.
#[derive(Parser)]
#[command(version)]
struct Cli {
    /// TOML config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Listen address, overriding the config file.
    #[arg(long, env = LISTEN_ENV)]
    listen: Option<SocketAddr>,
    /// Snapshot file, overriding the config file.
    #[arg(long)]
    persistence: Option<PathBuf>,
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()))
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();
    let mut config = match &cli.config {
        Some(path) => match ServiceConfig::load(path) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("pcauth-service: {e}");
                return ExitCode::FAILURE;
            }
        },
        None => ServiceConfig::default(),
    };
    if let Some(addr) = cli.listen {
        config.listen_address = addr;
    }
    if let Some(path) = cli.persistence {
        config.persistence_path = Some(path);
    }
    let runtime = tokio::runtime::Runtime::new().expect("tokio runtime");
    runtime.block_on(async move {
        let addr = config.listen_address;
        let service = match AuthService::open(config, Clock::system()) {
            Ok(s) => Arc::new(s),
            Err(e) => {
                eprintln!("pcauth-service: refusing to start: {e}");
                return ExitCode::FAILURE;
            }
        };
        let running = match http::serve(service.clone(), addr).await {
            Ok(r) => r,
            Err(e) => {
                eprintln!("pcauth-service: cannot listen on {addr}: {e}");
                return ExitCode::FAILURE;
            }
        };
        println!("listening on {}", running.url());
        let _ = tokio::signal::ctrl_c().await;
        running.shutdown();
        if let Err(e) = service.persist() {
            eprintln!("pcauth-service: final snapshot failed: {e}");
            return ExitCode::FAILURE;
        }
        ExitCode::SUCCESS
    })
}
