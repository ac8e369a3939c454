use std::io::Write;
use std::path::Path;
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;

use crate::args::ExperimentConfig;
use crate::run::Outcome;

pub const SCHEMA_ID: &str = "graphlimits-report/1";

/// The one field that differs between replays of the same config.
#[derive(Serialize)]
pub struct Timing {
    pub started_unix_ms: u128,
    pub wall_seconds: f64,
}

#[derive(Serialize)]
pub struct Report<'a> {
    pub schema: &'static str,
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub status: &'static str,
    pub config: &'a ExperimentConfig,
    pub seeds: &'a std::collections::BTreeMap<String, u64>,
    pub result: &'a Value,
    pub timing: Timing,
}

pub fn build<'a>(config: &'a ExperimentConfig, outcome: &'a Outcome, started: SystemTime, wall: Duration) -> Result<Report<'a>> {
    let echo = serde_json::to_value(config)?;
    let mut command = echo["command"].as_str().unwrap_or_default().to_string();
    if let Some(action) = echo.get("action").and_then(Value::as_str) {
        command = format!("{command} {action}");
    }
    Ok(Report {
        schema: SCHEMA_ID,
        tool: "graphlimits",
        version: env!("CARGO_PKG_VERSION"),
        command,
        status: if outcome.infeasible { "infeasible" } else { "ok" },
        config,
        seeds: &outcome.seeds,
        result: &outcome.result,
        timing: Timing {
            started_unix_ms: started.duration_since(UNIX_EPOCH).map(|d| d.as_millis()).unwrap_or(0),
            wall_seconds: wall.as_secs_f64(),
        },
    })
}

/// Writes through a temporary file in the destination directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("creating a file in {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}
