use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Serialize;

use crate::config::Config;
use crate::failure::{CliResult, Failure};

/// What produced an output file, written next to it.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    /// Full argument vector, program name excluded.
    pub args: Vec<String>,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    pub seed: u64,
    /// Configuration after flag overrides.
    pub config: Config,
    pub wall_time_ms: f64,
}

impl RunManifest {
    pub fn new(command: &str, config: &Config) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            args: std::env::args().skip(1).collect(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            seed: config.seed,
            config: config.clone(),
            wall_time_ms: 0.0,
        }
    }

    /// Writes `<output>.manifest.json`.
    pub fn write_beside(&mut self, output: &Path, elapsed: Duration) -> CliResult<()> {
        let mut name = output.as_os_str().to_owned();
        name.push(".manifest.json");
        self.write_to(Path::new(&name), elapsed)
    }

    pub fn write_to(&mut self, path: &Path, elapsed: Duration) -> CliResult<()> {
        self.wall_time_ms = elapsed.as_secs_f64() * 1e3;
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        std::fs::write(path, text + "\n").map_err(|e| Failure::io(path, e))
    }
}
