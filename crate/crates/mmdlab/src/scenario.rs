//! Scenario files: one space, a list of operations, one report.

use std::path::{Path, PathBuf};
use std::time::Instant;

use mmdlab_core::{Executor, ScalingFunction};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::{split_op, Operation, SpaceSource};
use crate::error::{from_value, LabError, LabResult};
use crate::ops::{load_space, run_operation, Context};
use crate::report::{SpaceSummary, SCHEMA_VERSION, TOOL_VERSION};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub space: SpaceSource,
    #[serde(default)]
    pub psi: Option<ScalingFunction>,
    /// Every scale an operation references must lie in `[lo, hi]`.
    #[serde(default)]
    pub scale_range: Option<(f64, f64)>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub operations: Vec<Value>,
}

/// An operation with its scenario-level settings.
#[derive(Debug, Clone)]
pub struct ScenarioOp {
    pub name: String,
    /// A failed or erroring required operation aborts the remaining ones.
    pub required: bool,
    pub op: Operation,
}

impl Scenario {
    pub fn parse(text: &str) -> LabResult<(Self, Vec<ScenarioOp>, Value)> {
        let echo: Value = crate::error::from_json(text)?;
        let scenario: Scenario = from_value(echo.clone())?;
        let ops = scenario.operations()?;
        Ok((scenario, ops, echo))
    }

    /// Decodes and validates the operation list.
    pub fn operations(&self) -> LabResult<Vec<ScenarioOp>> {
        if let Some((lo, hi)) = self.scale_range {
            if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
                return Err(LabError::config("/scale_range", "need 0 < lo <= hi < inf"));
            }
        }
        if let Some(psi) = &self.psi {
            psi.check().map_err(|e| LabError::config("/psi", e.to_string()))?;
        }
        let mut out = Vec::with_capacity(self.operations.len());
        for (i, raw) in self.operations.iter().enumerate() {
            let pointer = format!("/operations/{i}");
            let (kind, mut rest) = split_op(raw.clone(), &pointer)?;
            let obj = rest.as_object_mut().expect("split_op checked for an object");
            let name = match obj.remove("name") {
                None => format!("{i}-{kind}"),
                Some(Value::String(s)) => s,
                Some(_) => return Err(LabError::config(format!("{pointer}/name"), "expected a string")),
            };
            let required = match obj.remove("required") {
                None => false,
                Some(Value::Bool(b)) => b,
                Some(_) => return Err(LabError::config(format!("{pointer}/required"), "expected a boolean")),
            };
            let op = Operation::parse(&kind, rest, &pointer)?;
            if let Some((lo, hi)) = self.scale_range {
                if let Some((path, r)) = op.scales().into_iter().find(|(_, r)| !(*r >= lo && *r <= hi)) {
                    return Err(LabError::config(
                        format!("{pointer}{path}"),
                        format!("scale {r} lies outside the trusted range [{lo}, {hi}]"),
                    ));
                }
            }
            out.push(ScenarioOp { name, required, op });
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub tool_version: &'static str,
    pub kind: &'static str,
    pub name: String,
    pub seed: u64,
    pub scenario: Value,
    pub space: SpaceSummary,
    pub operations: Vec<OpRecord>,
    pub summary: Summary,
}

#[derive(Debug, Clone, Serialize)]
pub struct OpRecord {
    pub name: String,
    pub op: &'static str,
    pub required: bool,
    /// `pass`, `fail`, `info` (no verdict), `error` or `skipped`.
    pub status: &'static str,
    pub pass: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<OpError>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct OpError {
    pub message: String,
    pub exit_code: i32,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    /// `pass`, `fail` or `error`; errors dominate failures.
    pub verdict: &'static str,
    pub passed: usize,
    pub failed: usize,
    pub errors: usize,
    pub skipped: usize,
    /// Names of the failed and erroring operations, in order.
    pub failures: Vec<String>,
    pub aborted: bool,
}

impl RunReport {
    /// 0 pass, 1 verdict failure, otherwise the largest code among errors.
    pub fn exit_code(&self) -> i32 {
        let err = self.operations.iter().filter_map(|o| o.error.as_ref().map(|e| e.exit_code)).max();
        match (err, self.summary.failed) {
            (Some(code), _) => code,
            (None, 0) => 0,
            (None, _) => 1,
        }
    }
}

/// Runs every operation in order. Paths inside the scenario resolve against
/// `base_dir`; `seed` overrides the scenario's own.
pub fn run_scenario<E: Executor>(
    text: &str,
    base_dir: &Path,
    seed: Option<u64>,
    timings: bool,
    mut ctx: Context<'_, E>,
) -> LabResult<RunReport> {
    let (scenario, ops, mut echo) = Scenario::parse(text)?;
    let seed = seed.unwrap_or(scenario.seed);
    echo["seed"] = Value::from(seed);
    let space = load_space(&scenario.space, base_dir)?;
    ctx.seed = seed;
    ctx.psi = scenario.psi.clone();
    ctx.base_dir = PathBuf::from(base_dir);

    let mut records = Vec::with_capacity(ops.len());
    let mut aborted = false;
    for sop in &ops {
        if aborted {
            records.push(OpRecord {
                name: sop.name.clone(),
                op: sop.op.name(),
                required: sop.required,
                status: "skipped",
                pass: None,
                report: None,
                error: None,
                wall_time_s: None,
            });
            continue;
        }
        log::info!("running {} ({})", sop.name, sop.op.name());
        let start = Instant::now();
        let result = run_operation(&space, &sop.op, &ctx);
        let wall = timings.then(|| start.elapsed().as_secs_f64());
        let record = match result {
            Ok(out) => OpRecord {
                name: sop.name.clone(),
                op: sop.op.name(),
                required: sop.required,
                status: match out.pass {
                    Some(true) => "pass",
                    Some(false) => "fail",
                    None => "info",
                },
                pass: out.pass,
                report: Some(out.report),
                error: None,
                wall_time_s: wall,
            },
            Err(e) => {
                log::warn!("{} failed: {e}", sop.name);
                OpRecord {
                    name: sop.name.clone(),
                    op: sop.op.name(),
                    required: sop.required,
                    status: "error",
                    pass: None,
                    report: None,
                    error: Some(OpError {
                        message: e.to_string(),
                        exit_code: e.exit_code(),
                    }),
                    wall_time_s: wall,
                }
            }
        };
        aborted = sop.required && matches!(record.status, "fail" | "error");
        records.push(record);
    }
    let count = |s: &str| records.iter().filter(|r| r.status == s).count();
    let (failed, errors) = (count("fail"), count("error"));
    let summary = Summary {
        verdict: if errors > 0 {
            "error"
        } else if failed > 0 {
            "fail"
        } else {
            "pass"
        },
        passed: count("pass"),
        failed,
        errors,
        skipped: count("skipped"),
        failures: records
            .iter()
            .filter(|r| matches!(r.status, "fail" | "error"))
            .map(|r| r.name.clone())
            .collect(),
        aborted,
    };
    Ok(RunReport {
        schema_version: SCHEMA_VERSION,
        tool_version: TOOL_VERSION,
        kind: "run",
        name: scenario.name,
        seed,
        scenario: echo,
        space: SpaceSummary::of(&space),
        operations: records,
        summary,
    })
}
