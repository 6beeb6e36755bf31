use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::Result;
use serde::{Deserialize, Serialize};

use crate::io::write_json;

pub const MANIFEST: &str = "manifest.json";

/// Record of one command run. Everything except `started_unix` and
/// `elapsed_secs` is a function of the arguments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// Full argument vector, replayable with `tvinesynth replay`.
    pub args: Vec<String>,
    pub inputs: Vec<String>,
    pub config: serde_json::Value,
    pub seed: u64,
    pub version: String,
    pub outputs: Vec<String>,
    pub started_unix: f64,
    pub elapsed_secs: f64,
}

pub struct Clock {
    start: SystemTime,
}

impl Clock {
    pub fn start() -> Self {
        Self { start: SystemTime::now() }
    }

    pub fn finish(&self, mut m: RunManifest, out_dir: &Path) -> Result<()> {
        m.started_unix = self.start.duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0);
        m.elapsed_secs = self.start.elapsed().map(|d| d.as_secs_f64()).unwrap_or(0.0);
        write_json(&out_dir.join(MANIFEST), &m)
    }
}
