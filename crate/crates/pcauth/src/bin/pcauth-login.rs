use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use pcauth::adapter::{authenticate, AdapterConfig, AuthOutcome};
use pcauth::api::HttpClient;

const EXIT_ERROR: u8 = 3;

/// Login step for a PAM-style stack. Exit status: 0 success, 1 denied,
/// 2 timeout, 3 error.
#[derive(Parser)]
#[command(version)]
struct Cli {
    /// OS username to authenticate (defaults to $USER).
    #[arg(long, env = "USER")]
    user: String,
    /// Adapter config file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Overrides timeout_ms from the config.
    #[arg(long)]
    timeout_ms: Option<u64>,
    /// Print a key=value outcome line on stderr.
    #[arg(long)]
    report: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(EXIT_ERROR);
        }
    };
    let mut config = match AdapterConfig::load(&cli.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("pcauth-login: {e}");
            return ExitCode::from(EXIT_ERROR);
        }
    };
    if let Some(ms) = cli.timeout_ms {
        config.timeout_ms = ms;
        if let Err(e) = config.validate() {
            eprintln!("pcauth-login: {e}");
            return ExitCode::from(EXIT_ERROR);
        }
    }
    let runtime = tokio::runtime::Builder::new_current_thread()
        .enable_all()
        .build()
        .expect("tokio runtime");
    let report = runtime.block_on(async {
        match HttpClient::new(&config.service_url) {
            Ok(client) => Some(authenticate(&client, &config, &cli.user, &mut std::io::stdout()).await),
            Err(e) => {
                eprintln!("pcauth-login: {e}");
                None
            }
        }
    });
    let Some(report) = report else {
        return ExitCode::from(EXIT_ERROR);
    };
    if let AuthOutcome::Error(e) = &report.outcome {
        eprintln!("pcauth-login: {e}");
    }
    if cli.report {
        eprintln!("{}", report.report_line());
    }
    ExitCode::from(report.outcome.exit_code() as u8)
}
