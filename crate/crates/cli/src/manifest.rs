use std::path::Path;
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::Failure;

/// One per output directory, written last so its presence marks a finished
/// (or cleanly aborted) command.
#[derive(Serialize)]
pub struct Manifest {
    pub command: String,
    /// sha256 of the resolved config text.
    pub config_hash: String,
    /// Paths relative to the output directory, in write order.
    pub artifacts: Vec<String>,
    pub wall_time_s: f64,
    pub tool_version: String,
    /// `ok` or `unstable`.
    pub status: String,
}

pub fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Tracks artifacts of one command as they are written.
pub struct Recorder {
    command: &'static str,
    config_hash: String,
    artifacts: Vec<String>,
    start: Instant,
}

impl Recorder {
    pub fn new(command: &'static str, resolved: &str) -> Self {
        Recorder {
            command,
            config_hash: digest(resolved.as_bytes()),
            artifacts: Vec::new(),
            start: Instant::now(),
        }
    }

    pub fn add(&mut self, name: impl Into<String>) {
        self.artifacts.push(name.into());
    }

    pub fn finish(self, dir: &Path, status: &str) -> Result<(), Failure> {
        let m = Manifest {
            command: self.command.into(),
            config_hash: self.config_hash,
            artifacts: self.artifacts,
            wall_time_s: self.start.elapsed().as_secs_f64(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            status: status.into(),
        };
        let text = serde_json::to_string_pretty(&m).expect("manifest serializes");
        let path = dir.join("manifest.json");
        std::fs::write(&path, text + "\n").map_err(|e| Failure {
            code: 1,
            message: format!("i/o error on {}: {e}", path.display()),
        })
    }
}
