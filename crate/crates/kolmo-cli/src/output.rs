//! Result files and the run manifest.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::error::CliError;

/// A reported number with the method that produced it.
#[derive(Debug, Clone, Serialize)]
pub struct Quantity {
    pub value: f64,
    pub provenance: String,
}

pub fn q(value: f64, provenance: impl Into<String>) -> Quantity {
    Quantity {
        value,
        provenance: provenance.into(),
    }
}

/// Writes result files into one directory and keeps the inventory.
pub struct Writer {
    dir: PathBuf,
    files: Vec<(String, String, u64)>,
    stages: Vec<(String, f64)>,
    started: Instant,
}

fn io_err(path: &Path, source: std::io::Error) -> CliError {
    CliError::Io {
        path: path.display().to_string(),
        source,
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

impl Writer {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self, CliError> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(|e| io_err(&dir, e))?;
        Ok(Self {
            dir,
            files: Vec::new(),
            stages: Vec::new(),
            started: Instant::now(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Records the wall time since the previous stage.
    pub fn stage(&mut self, name: &str) {
        let total: f64 = self.stages.iter().map(|s| s.1).sum();
        let now = self.started.elapsed().as_secs_f64();
        self.stages.push((name.to_string(), now - total));
    }

    pub fn bytes(&mut self, name: &str, data: &[u8]) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, data).map_err(|e| io_err(&path, e))?;
        self.files.push((name.to_string(), sha256_hex(data), data.len() as u64));
        Ok(())
    }

    pub fn json(&mut self, name: &str, value: &impl Serialize) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value).expect("report serializes");
        text.push('\n');
        self.bytes(name, text.as_bytes())
    }

    pub fn csv(&mut self, name: &str, header: &[String], rows: impl Iterator<Item = Vec<f64>>) -> Result<(), CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let path = self.dir.join(name);
        let csv_err = |e: csv::Error| io_err(&path, std::io::Error::other(e.to_string()));
        w.write_record(header).map_err(csv_err)?;
        for row in rows {
            w.write_record(row.iter().map(|v| format!("{v:e}"))).map_err(csv_err)?;
        }
        let data = w.into_inner().map_err(|e| io_err(&path, std::io::Error::other(e.to_string())))?;
        self.bytes(name, &data)
    }

    /// Writes manifest.json: config echo, versions, stage times, summary and inventory.
    pub fn finish(mut self, command: &str, cfg: &ExperimentConfig, summary: Value) -> Result<PathBuf, CliError> {
        self.stage("write");
        let manifest = json!({
            "tool": "kolmo",
            "version": env!("CARGO_PKG_VERSION"),
            "command": command,
            "config": cfg,
            "stages": self.stages.iter().map(|(n, t)| json!({"name": n, "seconds": t})).collect::<Vec<_>>(),
            "summary": summary,
            "files": self.files.iter().map(|(n, h, b)| json!({"name": n, "sha256": h, "bytes": b})).collect::<Vec<_>>(),
        });
        let path = self.dir.join("manifest.json");
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
        fs::write(&path, text).map_err(|e| io_err(&path, e))?;
        Ok(path)
    }
}
