use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tracing::error;

use kolmo_cli::{commands, load_config, presets, run, CliError, Command};

#[derive(Parser)]
#[command(name = "kolmo", version, about = "Neumann problems for Kolmogorov operators on convex sets")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    preset: Option<String>,
    /// Output directory (overrides output.dir).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Cmd {
    Solve(Common),
    PenalizeSweep(Common),
    FeynmanKac(Common),
    FluxCheck(Common),
    SampleInvariant(Common),
    /// Parse and check a config without solving.
    ValidateConfig(Common),
    ListPresets,
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "warn".into()),
        )
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            error!("{e}");
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(CliError::Config("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    }
    let (cmd, c) = match cli.command {
        Cmd::ListPresets => {
            for n in presets::NAMES {
                println!("{n}");
            }
            return Ok(());
        }
        Cmd::ValidateConfig(c) => {
            let cfg = load_config(c.config.as_deref(), c.preset.as_deref(), c.seed)?;
            let d = commands::describe(&cfg)?;
            println!("{}", serde_json::to_string_pretty(&d).expect("summary serializes"));
            return Ok(());
        }
        Cmd::Solve(c) => (Command::Solve, c),
        Cmd::PenalizeSweep(c) => (Command::PenalizeSweep, c),
        Cmd::FeynmanKac(c) => (Command::FeynmanKac, c),
        Cmd::FluxCheck(c) => (Command::FluxCheck, c),
        Cmd::SampleInvariant(c) => (Command::SampleInvariant, c),
    };
    let cfg = load_config(c.config.as_deref(), c.preset.as_deref(), c.seed)?;
    let summary = run(cmd, &cfg, c.out)?;
    println!("{}", serde_json::to_string_pretty(&summary).expect("summary serializes"));
    Ok(())
}
