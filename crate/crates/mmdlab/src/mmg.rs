//! The `.mmg` text format.
//!
//! ```text
//! # mmg v1 metric=graph
//! v 0 1 0 0
//! v 1 1 1 0
//! e 0 1 1 1
//! ```
//!
//! `v <id> <measure> [<coord>...]` with ids dense from 0 in order, then
//! `e <u> <v> <conductance> [<length>]`. Further `#` lines and blank lines are
//! ignored. Lengths are only meaningful for the graph metric; without one an
//! edge has unit length. Floats are written with 17 significant digits so a
//! write/read cycle is exact.

use std::fmt::Write as _;
use std::path::Path;

use mmdlab_core::{GraphBuilder, MetricMeasureGraph, MetricMode, VertexId};

use crate::error::{LabError, LabResult};
use crate::fmt::{fmt17, parse_f64};

const HEADER: &str = "# mmg v1 metric=";

pub fn to_string(space: &MetricMeasureGraph) -> LabResult<String> {
    if space.has_parallel_edges() {
        return Err(LabError::Export("parallel edges cannot be written to .mmg".into()));
    }
    let metric = match space.metric() {
        MetricMode::Graph => "graph",
        MetricMode::Euclid => "euclid",
    };
    let mut out = String::with_capacity(32 * (space.len() + space.edge_count()));
    let _ = writeln!(out, "{HEADER}{metric}");
    for v in 0..space.len() {
        let _ = write!(out, "v {v} {}", fmt17(space.measure(v)));
        for c in space.coords(v).unwrap_or(&[]) {
            let _ = write!(out, " {}", fmt17(*c));
        }
        out.push('\n');
    }
    for e in space.edges() {
        let _ = write!(out, "e {} {} {}", e.u, e.v, fmt17(e.conductance));
        if space.metric() == MetricMode::Graph {
            let _ = write!(out, " {}", fmt17(e.length));
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn write(space: &MetricMeasureGraph, path: &Path) -> LabResult<()> {
    let text = to_string(space)?;
    std::fs::write(path, text).map_err(|e| LabError::io(path, e))
}

pub fn read(path: &Path) -> LabResult<MetricMeasureGraph> {
    let text = std::fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
    parse(&text, &path.display().to_string())
}

/// Parses `.mmg` text; `file` only labels error messages.
pub fn parse(text: &str, file: &str) -> LabResult<MetricMeasureGraph> {
    let err = |line: usize, message: String| LabError::Format {
        file: file.to_string(),
        line,
        message,
    };
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, first) = lines.next().ok_or_else(|| err(1, "empty file".into()))?;
    let metric = match first.trim().strip_prefix(HEADER) {
        Some("graph") => MetricMode::Graph,
        Some("euclid") => MetricMode::Euclid,
        Some(other) => return Err(err(1, format!("unknown metric {other:?}"))),
        None => return Err(err(1, format!("expected header `{HEADER}<graph|euclid>`"))),
    };
    let mut builder = GraphBuilder::new(metric);
    let mut in_edges = false;
    for (no, line) in lines {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split_ascii_whitespace();
        let tag = fields.next().unwrap_or_default();
        let rest: Vec<&str> = fields.collect();
        let float = |s: &str| parse_f64(s).ok_or_else(|| err(no, format!("invalid number {s:?}")));
        let id = |s: &str| s.parse::<VertexId>().map_err(|_| err(no, format!("invalid vertex id {s:?}")));
        match tag {
            "v" => {
                if in_edges {
                    return Err(err(no, "vertex after the first edge".into()));
                }
                if rest.len() < 2 {
                    return Err(err(no, "expected `v <id> <measure> [<coord>...]`".into()));
                }
                let v = id(rest[0])?;
                if v != builder.vertex_count() {
                    return Err(err(no, format!("vertex id {v}, expected {}", builder.vertex_count())));
                }
                let m = float(rest[1])?;
                let coords = rest[2..].iter().map(|s| float(s)).collect::<LabResult<Vec<f64>>>()?;
                let added = if coords.is_empty() {
                    builder.add_vertex(m)
                } else {
                    builder.add_vertex_at(m, &coords)
                };
                added.map_err(|e| err(no, e.to_string()))?;
            }
            "e" => {
                in_edges = true;
                if !(3..=4).contains(&rest.len()) {
                    return Err(err(no, "expected `e <u> <v> <conductance> [<length>]`".into()));
                }
                let (u, v, c) = (id(rest[0])?, id(rest[1])?, float(rest[2])?);
                let added = match rest.get(3) {
                    Some(_) if metric == MetricMode::Euclid => {
                        return Err(err(no, "edge lengths are derived from coordinates under metric=euclid".into()))
                    }
                    Some(len) => builder.add_edge_with_length(u, v, c, float(len)?),
                    None => builder.add_edge(u, v, c),
                };
                added.map_err(|e| err(no, e.to_string()))?;
            }
            other => return Err(err(no, format!("unknown record {other:?}"))),
        }
    }
    builder.build().map_err(|e| err(0, e.to_string()))
}

/// Refinement maps between consecutive levels: lines `map <level> <coarse>
/// <fine>` where `level` counts from 0; every coarse vertex of every level
/// must be mapped exactly once.
pub fn parse_maps(text: &str, file: &str, level_sizes: &[usize]) -> LabResult<Vec<Vec<VertexId>>> {
    let err = |line: usize, message: String| LabError::Format {
        file: file.to_string(),
        line,
        message,
    };
    let levels = level_sizes.len().saturating_sub(1);
    let mut maps: Vec<Vec<Option<VertexId>>> = level_sizes[..levels].iter().map(|&n| vec![None; n]).collect();
    for (i, line) in text.lines().enumerate() {
        let no = i + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let f: Vec<&str> = line.split_ascii_whitespace().collect();
        let nums: Option<Vec<usize>> = f.get(1..).and_then(|s| s.iter().map(|x| x.parse().ok()).collect());
        let (level, coarse, fine) = match (f.first(), nums.as_deref()) {
            (Some(&"map"), Some(&[l, c, fi])) => (l, c, fi),
            _ => return Err(err(no, "expected `map <level> <coarse> <fine>`".into())),
        };
        if level >= levels {
            return Err(err(no, format!("level {level} has no finer level")));
        }
        if coarse >= level_sizes[level] || fine >= level_sizes[level + 1] {
            return Err(err(no, format!("vertex out of range for level {level}")));
        }
        if maps[level][coarse].replace(fine).is_some() {
            return Err(err(no, format!("vertex {coarse} of level {level} mapped twice")));
        }
    }
    maps.into_iter()
        .enumerate()
        .map(|(level, m)| {
            m.iter()
                .enumerate()
                .map(|(v, f)| f.ok_or_else(|| err(0, format!("vertex {v} of level {level} is not mapped"))))
                .collect()
        })
        .collect()
}

pub fn maps_to_string(maps: &[Vec<VertexId>]) -> String {
    let mut out = String::new();
    for (level, m) in maps.iter().enumerate() {
        for (c, f) in m.iter().enumerate() {
            let _ = writeln!(out, "map {level} {c} {f}");
        }
    }
    out
}
