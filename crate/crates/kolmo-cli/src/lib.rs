//! Configuration, presets and orchestration behind the `kolmo` binary.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod presets;
pub mod setup;

pub use commands::Command;
pub use config::ExperimentConfig;
pub use error::CliError;

use std::path::{Path, PathBuf};

/// Loads a config from a file or a preset name, with optional overrides.
pub fn load_config(path: Option<&Path>, preset: Option<&str>, seed: Option<u64>) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match (path, preset) {
        (Some(_), Some(_)) => return Err(CliError::Config("give either --config or --preset, not both".into())),
        (Some(p), None) => {
            let text = std::fs::read_to_string(p).map_err(|source| CliError::Io {
                path: p.display().to_string(),
                source,
            })?;
            ExperimentConfig::parse(&text)?
        }
        (None, Some(name)) => presets::load(name)?,
        (None, None) => return Err(CliError::Config("one of --config or --preset is required".into())),
    };
    if let Some(s) = seed {
        cfg.seed = s;
        if let Some(sde) = &mut cfg.sde {
            sde.seed = None;
        }
    }
    Ok(cfg)
}

/// Runs one experiment command, writing into `out` (or the configured directory).
pub fn run(cmd: Command, cfg: &ExperimentConfig, out: Option<PathBuf>) -> Result<serde_json::Value, CliError> {
    let dir = out.unwrap_or_else(|| PathBuf::from(&cfg.output.dir));
    let writer = output::Writer::new(dir)?;
    commands::run(cmd, cfg, writer)
}
