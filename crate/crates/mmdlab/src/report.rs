//! Report envelopes shared by every subcommand.

use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::error::{LabError, LabResult};

/// Bumped on any incompatible change to a report layout.
pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Report of a single `estimate`, `check` or `harnack` invocation.
#[derive(Debug, Clone, Serialize)]
pub struct Envelope {
    pub schema_version: u32,
    pub tool_version: &'static str,
    pub kind: &'static str,
    pub operation: String,
    pub seed: u64,
    pub space: SpaceSummary,
    pub config: Value,
    pub pass: Option<bool>,
    pub report: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpaceSummary {
    pub vertices: usize,
    pub edges: usize,
    pub metric: mmdlab_core::MetricMode,
}

impl SpaceSummary {
    pub fn of(space: &mmdlab_core::MetricMeasureGraph) -> Self {
        Self {
            vertices: space.len(),
            edges: space.edge_count(),
            metric: space.metric(),
        }
    }
}

/// Pretty JSON with a trailing newline; identical inputs give identical bytes.
pub fn to_json_text<T: Serialize>(value: &T) -> LabResult<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| LabError::Internal(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// Writes to `path`, or to stdout when `path` is `None` or `-`.
pub fn emit(text: &str, path: Option<&Path>) -> LabResult<()> {
    match path {
        Some(p) if p != Path::new("-") => std::fs::write(p, text).map_err(|e| LabError::io(p, e)),
        _ => {
            use std::io::Write;
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).map_err(|e| LabError::io("<stdout>", e))
        }
    }
}
