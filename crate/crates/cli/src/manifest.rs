use serde::Serialize;
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Written next to every output file as `<file>.manifest.json`.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config: serde_json::Value,
    pub seed: Option<u64>,
    pub reps: Option<usize>,
    pub workers: usize,
    pub wall_clock_seconds: f64,
    pub tool_version: &'static str,
}

pub struct Recorder {
    command: &'static str,
    started: Instant,
}

impl Recorder {
    pub fn start(command: &'static str) -> Self {
        Self { command, started: Instant::now() }
    }

    pub fn finish(
        &self,
        config: &impl Serialize,
        seed: Option<u64>,
        reps: Option<usize>,
        workers: usize,
    ) -> serde_json::Result<RunManifest> {
        Ok(RunManifest {
            command: self.command.to_string(),
            config: serde_json::to_value(config)?,
            seed,
            reps,
            workers,
            wall_clock_seconds: self.started.elapsed().as_secs_f64(),
            tool_version: env!("CARGO_PKG_VERSION"),
        })
    }
}

pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    out.with_file_name(name)
}

pub fn write_sidecar(out: &Path, manifest: &RunManifest) -> std::io::Result<()> {
    let text = serde_json::to_string_pretty(manifest).map_err(std::io::Error::other)?;
    std::fs::write(sidecar_path(out), text + "\n")
}
