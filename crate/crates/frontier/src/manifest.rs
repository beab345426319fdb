use std::path::Path;
use std::time::Instant;

use serde::Serialize;

use crate::config::Settings;
use crate::error::AppError;
use crate::io::write_json;

pub const MANIFEST_FILE: &str = "manifest.json";

/// Record written next to every set of outputs.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub arguments: Vec<String>,
    pub settings: Settings,
    pub seed: u64,
    pub input_sha256: Option<String>,
    pub outputs: Vec<String>,
    pub elapsed_seconds: f64,
}

impl RunManifest {
    pub fn new(command: &str, settings: &Settings) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_owned(),
            arguments: std::env::args().skip(1).collect(),
            settings: settings.clone(),
            seed: settings.seed,
            input_sha256: None,
            outputs: Vec::new(),
            elapsed_seconds: 0.0,
        }
    }

    pub fn finish(mut self, dir: &Path, started: Instant) -> Result<(), AppError> {
        self.elapsed_seconds = started.elapsed().as_secs_f64();
        write_json(&dir.join(MANIFEST_FILE), &self)
    }
}
