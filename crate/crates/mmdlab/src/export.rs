//! Plot series extracted from reports, written as CSV.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde_json::Value;

use crate::error::{LabError, LabResult};
use crate::fmt::fmt17;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesKind {
    ConstantVsScale,
    RatioVsEpsilon,
    HarnackVsRadius,
}

impl SeriesKind {
    pub const ALL: [SeriesKind; 3] = [SeriesKind::ConstantVsScale, SeriesKind::RatioVsEpsilon, SeriesKind::HarnackVsRadius];

    pub fn name(self) -> &'static str {
        match self {
            SeriesKind::ConstantVsScale => "constant-vs-scale",
            SeriesKind::RatioVsEpsilon => "ratio-vs-epsilon",
            SeriesKind::HarnackVsRadius => "harnack-vs-radius",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }

    fn header(self) -> &'static str {
        match self {
            SeriesKind::ConstantVsScale => "scale,constant",
            SeriesKind::RatioVsEpsilon => "epsilon,ratio",
            SeriesKind::HarnackVsRadius => "r,constant",
        }
    }
}

/// Reads a float written by the reports, including `"inf"`-style strings;
/// `null` (no value) is `None`.
fn number(v: &Value) -> Option<f64> {
    match v {
        Value::Number(n) => n.as_f64(),
        Value::String(s) => crate::fmt::parse_f64(s),
        _ => None,
    }
}

/// Maximum value per abscissa, in ascending abscissa order.
fn reduce(points: impl IntoIterator<Item = (f64, f64)>) -> Vec<(f64, f64)> {
    let mut by: BTreeMap<u64, (f64, f64)> = BTreeMap::new();
    for (x, y) in points {
        // Positive floats order like their bit patterns.
        let slot = by.entry(x.to_bits()).or_insert((x, y));
        if y > slot.1 || y.is_nan() {
            slot.1 = y;
        }
    }
    let mut rows: Vec<_> = by.into_values().collect();
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    rows
}

fn entries(v: &Value) -> &[Value] {
    v.get("entries").and_then(Value::as_array).map_or(&[], Vec::as_slice)
}

/// Series of one operation report, `None` if the operation does not carry it.
pub fn series_of(op: &str, report: &Value, kind: SeriesKind) -> Option<Vec<(f64, f64)>> {
    match (kind, op) {
        (SeriesKind::ConstantVsScale, "vd" | "pi" | "cap" | "fvg" | "rvd") => Some(reduce(entries(report).iter().filter_map(|e| {
            let scale = e.get("R").and_then(number).or_else(|| e.get("r").and_then(number))?;
            Some((scale, e.get("value").and_then(number)?))
        }))),
        (SeriesKind::ConstantVsScale, "minimal-c0") => Some(reduce(
            report
                .get("per_radius")?
                .as_array()?
                .iter()
                .filter_map(|p| Some((number(p.get(0)?)?, p.get(1).and_then(number).unwrap_or(f64::INFINITY)))),
        )),
        (SeriesKind::RatioVsEpsilon, "chain-bound") => Some(reduce(
            entries(report).iter().filter_map(|e| Some((number(e.get("epsilon")?)?, number(e.get("ratio")?)?))),
        )),
        (SeriesKind::HarnackVsRadius, "harnack") => {
            let sweep = report
                .get("weighted")
                .or_else(|| report.get("sweep"))
                .unwrap_or(report);
            Some(reduce(
                entries(sweep)
                    .iter()
                    .filter_map(|e| Some((number(e.get("r")?)?, e.get("constant").and_then(number)?))),
            ))
        }
        _ => None,
    }
}

/// Extracts a series from a single-operation envelope or a run report. For
/// run reports `operation` selects by name; otherwise the first operation
/// carrying the series is used.
pub fn export(report: &Value, kind: SeriesKind, operation: Option<&str>) -> LabResult<String> {
    let missing = || LabError::Export(format!("report has no {} series", kind.name()));
    let rows = match report.get("kind").and_then(Value::as_str) {
        Some("run") => {
            let ops = report.get("operations").and_then(Value::as_array).ok_or_else(missing)?;
            ops.iter()
                .filter(|o| operation.is_none_or(|n| o.get("name").and_then(Value::as_str) == Some(n)))
                .find_map(|o| series_of(o.get("op")?.as_str()?, o.get("report")?, kind))
                .ok_or_else(missing)?
        }
        Some(_) => {
            let op = report.get("operation").and_then(Value::as_str).ok_or_else(missing)?;
            series_of(op, report.get("report").ok_or_else(missing)?, kind).ok_or_else(missing)?
        }
        None => return Err(LabError::Export("not a report: missing `kind`".into())),
    };
    if rows.is_empty() {
        return Err(LabError::Export(format!("the {} series is empty", kind.name())));
    }
    let mut out = String::new();
    out.push_str(kind.header());
    out.push('\n');
    for (x, y) in rows {
        let _ = writeln!(out, "{},{}", fmt17(x), fmt17(y));
    }
    Ok(out)
}
