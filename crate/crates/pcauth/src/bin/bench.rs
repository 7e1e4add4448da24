use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use pcauth::bench::{emit_report, run_study, ClockMode, ReportFormat, RunOptions, StudyPlan, Transport};

/// Login-duration benchmark.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a study plan and report per-variant duration and success rate.
    Run(RunArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Text,
    Structured,
}

#[derive(Clone, Copy, ValueEnum)]
enum ClockArg {
    /// Real time over loopback HTTP.
    System,
    /// Simulated time, in-process. Reports are bit-identical per seed.
    Virtual,
}

#[derive(clap::Args)]
struct RunArgs {
    /// Study plan (TOML). Defaults to the built-in reference study.
    #[arg(long)]
    plan: Option<PathBuf>,
    /// Overrides the plan seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "text")]
    format: FormatArg,
    /// Run device variants in a seeded random order.
    #[arg(long)]
    shuffle: bool,
    /// Multiplies injected latencies and the request ttl.
    #[arg(long, default_value_t = 1.0)]
    time_scale: f64,
    #[arg(long, value_enum, default_value = "system")]
    clock: ClockArg,
    /// Average durations over successful attempts only.
    #[arg(long)]
    successes_only: bool,
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "warn".into()))
        .with_writer(std::io::stderr)
        .init();
    let Command::Run(args) = Cli::parse().command;
    let mut plan = match &args.plan {
        Some(path) => match StudyPlan::load(path) {
            Ok(p) => p,
            Err(e) => {
                eprintln!("bench: {e}");
                return ExitCode::FAILURE;
            }
        },
        None => StudyPlan::reference_study(42),
    };
    if let Some(seed) = args.seed {
        plan.seed = seed;
    }
    let (clock, transport) = match args.clock {
        ClockArg::System => (ClockMode::System, Transport::Loopback),
        ClockArg::Virtual => (ClockMode::Virtual, Transport::InProcess),
    };
    let options = RunOptions {
        time_scale: args.time_scale,
        transport,
        clock,
        shuffle: args.shuffle,
        successes_only: args.successes_only,
        ..RunOptions::default()
    };
    let runtime = match clock {
        ClockMode::System => tokio::runtime::Builder::new_multi_thread().enable_all().build(),
        ClockMode::Virtual => tokio::runtime::Builder::new_current_thread()
            .enable_all()
            .start_paused(true)
            .build(),
    }
    .expect("tokio runtime");
    let summary = match runtime.block_on(run_study(&plan, &options)) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("bench: {e}");
            return ExitCode::FAILURE;
        }
    };
    let format = match args.format {
        FormatArg::Text => ReportFormat::Text,
        FormatArg::Structured => ReportFormat::Structured,
    };
    match emit_report(&summary, format, args.out.as_deref()) {
        Ok(text) if args.out.is_none() => print!("{text}"),
        Ok(_) => {}
        Err(e) => {
            eprintln!("bench: cannot write report: {e}");
            return ExitCode::FAILURE;
        }
    }
    if summary.complete {
        ExitCode::SUCCESS
    } else {
        eprintln!("bench: run incomplete");
        ExitCode::FAILURE
    }
}
