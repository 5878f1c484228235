use std::fs::OpenOptions;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const SCHEMA: &str = "kzcocycle.run-record/v1";

/// Reproducible part of a record. Two runs with the same flags produce the
/// same body, byte for byte.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Body {
    pub command: String,
    pub config: Value,
    pub stratum: Option<String>,
    pub component: Option<String>,
    pub permutation: Option<String>,
    pub fingerprint: Option<String>,
    pub seeds: Vec<u64>,
    pub estimates: Value,
    pub diagnostics: Value,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub schema: String,
    pub body: Body,
    pub wall_clock_seconds: f64,
    pub jobs: usize,
}

impl RunRecord {
    pub fn new(body: Body, wall_clock_seconds: f64) -> Self {
        RunRecord { schema: SCHEMA.to_string(), body, wall_clock_seconds, jobs: rayon::current_num_threads() }
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("records serialize")
    }
}

pub fn version() -> String {
    env!("CARGO_PKG_VERSION").to_string()
}

/// Appends `text` to `path`, or prints it when no path is given.
pub fn emit(path: Option<&Path>, text: &str) -> std::io::Result<()> {
    match path {
        Some(p) => {
            let mut f = OpenOptions::new().create(true).append(true).open(p)?;
            f.write_all(text.as_bytes())
        }
        None => {
            print!("{text}");
            std::io::stdout().flush()
        }
    }
}

/// True when `path` is absent or empty, i.e. a CSV header is still needed.
pub fn needs_header(path: Option<&Path>) -> bool {
    path.map_or(true, |p| std::fs::metadata(p).map_or(true, |m| m.len() == 0))
}
