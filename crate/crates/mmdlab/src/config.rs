//! Typed configuration of every operation and of the space source.
//!
//! Operation configs arrive as JSON objects tagged by `op`. Each is decoded
//! on its own so error pointers stay exact: `/operations/3/radii/1`.

use std::path::PathBuf;

use mmdlab_core::estimators::DEFAULT_CAP;
use mmdlab_core::generators::{GeneratorSpec, WeightSpec};
use mmdlab_core::harmonic::{RemoteBallSpec, DEFAULT_HARNACK_CAP};
use mmdlab_core::linalg::SolverConfig;
use mmdlab_core::{RegionSpec, ScalingFunction, VertexId};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{from_value, LabError, LabResult};

fn default_cap() -> f64 {
    DEFAULT_CAP
}

fn default_harnack_cap() -> f64 {
    DEFAULT_HARNACK_CAP
}

fn default_two() -> f64 {
    2.0
}

fn default_delta() -> f64 {
    0.5
}

fn default_tol() -> f64 {
    1e-9
}

fn default_pair_limit() -> usize {
    200
}

/// Explicit ids, or `"interior-sample:<n>"` for `n` seeded draws among the
/// vertices at least the operation's margin away from the boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CentersRepr", into = "CentersRepr")]
pub enum Centers {
    Ids(Vec<VertexId>),
    InteriorSample(usize),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum CentersRepr {
    Ids(Vec<VertexId>),
    Text(String),
}

impl TryFrom<CentersRepr> for Centers {
    type Error = String;

    fn try_from(r: CentersRepr) -> Result<Self, String> {
        match r {
            CentersRepr::Ids(ids) => Ok(Centers::Ids(ids)),
            CentersRepr::Text(s) => s
                .strip_prefix("interior-sample:")
                .and_then(|n| n.parse().ok())
                .map(Centers::InteriorSample)
                .ok_or_else(|| format!("expected a list of vertex ids or \"interior-sample:<n>\", got {s:?}")),
        }
    }
}

impl From<Centers> for CentersRepr {
    fn from(c: Centers) -> Self {
        match c {
            Centers::Ids(ids) => CentersRepr::Ids(ids),
            Centers::InteriorSample(n) => CentersRepr::Text(format!("interior-sample:{n}")),
        }
    }
}

/// A single value or a list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    pub fn to_vec(&self) -> Vec<T> {
        match self {
            OneOrMany::One(x) => vec![x.clone()],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

/// Where a space comes from. Exactly one of `generate` and `file`; `glue`
/// joins two copies at a vertex before `weight` reweights the result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceSource {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generate: Option<GeneratorSpec>,
    /// `.mmg` file, relative to the scenario file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub glue: Option<Glue>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<WeightSpec>,
}

/// Two copies of the space with vertex `a` of the first identified with
/// vertex `b` of the second.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Glue {
    pub a: VertexId,
    pub b: VertexId,
}

/// Pairs given explicitly or sampled at prescribed distances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PairsSpec {
    Explicit(Vec<(VertexId, VertexId)>),
    AtDistance(PairSampling),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairSampling {
    /// Where the first point of each pair is drawn from.
    pub sources: Centers,
    pub distances: Vec<f64>,
    /// Pairs per distance.
    pub count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
}

/// A function on the vertices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionSpec {
    /// `v ↦ d(origin, v)`.
    Distance { origin: VertexId },
    Values { values: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VdConfig {
    pub centers: Centers,
    pub radii: Vec<f64>,
    #[serde(default = "default_cap")]
    pub cap: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PiConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psi: Option<ScalingFunction>,
    pub centers: Centers,
    pub radii: Vec<f64>,
    #[serde(rename = "A", default = "default_enlargements")]
    pub a: OneOrMany<f64>,
    #[serde(default = "default_cap")]
    pub cap: f64,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
}

fn default_enlargements() -> OneOrMany<f64> {
    OneOrMany::One(2.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psi: Option<ScalingFunction>,
    #[serde(rename = "A1", default = "default_two")]
    pub a1: f64,
    pub centers: Centers,
    pub radii: Vec<f64>,
    #[serde(default = "default_cap")]
    pub cap: f64,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
}

/// Scale pairs `(r, R)`, or every `r < R` drawn from `radii`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FvgConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psi: Option<ScalingFunction>,
    pub centers: Centers,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale_pairs: Option<Vec<(f64, f64)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radii: Option<Vec<f64>>,
    #[serde(default = "default_cap")]
    pub cap: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RvdConfig {
    pub centers: Centers,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale_pairs: Option<Vec<(f64, f64)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radii: Option<Vec<f64>>,
    pub alpha: f64,
    #[serde(default = "default_cap")]
    pub cap: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainingConfig {
    pub x: VertexId,
    #[serde(rename = "R")]
    pub big_r: f64,
    #[serde(rename = "A1", default = "default_two")]
    pub a1: f64,
    pub k: OneOrMany<u32>,
    #[serde(default)]
    pub solver: SolverConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainConfig {
    pub x: VertexId,
    pub y: VertexId,
    #[serde(default = "all_region")]
    pub container: RegionSpec,
    pub epsilon: f64,
}

fn all_region() -> RegionSpec {
    RegionSpec::All
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BallConfig {
    pub centers: Centers,
    pub radii: Vec<f64>,
    #[serde(rename = "A", default = "default_two")]
    pub a: f64,
    pub epsilons: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnulusConfig {
    pub centers: Centers,
    pub radii: Vec<f64>,
    #[serde(rename = "C")]
    pub c: f64,
    pub epsilon: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnulusPathConfig {
    pub centers: Centers,
    pub radii: Vec<f64>,
    #[serde(rename = "C0")]
    pub c0: OneOrMany<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MinimalC0Config {
    pub centers: Centers,
    pub radii: Vec<f64>,
    pub grid: Vec<f64>,
    /// Pass only when every radius needs the same grid value.
    #[serde(default)]
    pub require_uniform: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainBoundConfig {
    pub pairs: PairsSpec,
    pub epsilons: Vec<f64>,
    #[serde(rename = "A0", default = "default_two")]
    pub a0: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psi: Option<ScalingFunction>,
    /// Largest allowed ratio between the suprema of two `(ε, d)` cells.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_spread: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RcaConfig {
    pub origin: VertexId,
    #[serde(rename = "A", default = "default_two")]
    pub a: f64,
    pub radii: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PouConfig {
    #[serde(default = "all_region")]
    pub region: RegionSpec,
    pub epsilon: OneOrMany<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psi: Option<ScalingFunction>,
    /// Largest allowed ratio between the constants at two ε.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_ratio: Option<f64>,
    #[serde(default)]
    pub include_functions: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoPointConfig {
    pub u: FunctionSpec,
    pub x0: VertexId,
    #[serde(rename = "R")]
    pub big_r: f64,
    #[serde(rename = "C_P", default = "default_two")]
    pub c_p: f64,
    /// Defaults to seeded pairs from `B(x0, R/C_P)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pairs: Option<Vec<(VertexId, VertexId)>>,
    #[serde(default = "default_pair_limit")]
    pub max_pairs: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psi: Option<ScalingFunction>,
}

/// Levels coarse to fine. Without `maps` the refinement maps are recovered
/// from coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RefineConfig {
    pub levels: Vec<SpaceSource>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub maps: Option<PathBuf>,
    pub x: VertexId,
    pub y: VertexId,
    pub epsilon_ratio: f64,
    #[serde(rename = "A0", default = "default_two")]
    pub a0: f64,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HarnackConfig {
    pub centers: Centers,
    pub radii: Vec<f64>,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_harnack_cap")]
    pub cap: f64,
    #[serde(default)]
    pub solver: SolverConfig,
    /// Classifies balls as remote from `remote.origin`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub remote: Option<RemoteBallSpec>,
    /// Runs the stability experiment against this reweighting.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<WeightSpec>,
    #[serde(default)]
    pub counterexample: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
}

/// One estimate or check.
#[derive(Debug, Clone, PartialEq)]
pub enum Operation {
    Vd(VdConfig),
    Pi(PiConfig),
    Cap(CapConfig),
    Fvg(FvgConfig),
    Rvd(RvdConfig),
    Chaining(ChainingConfig),
    Chain(ChainConfig),
    Ball(BallConfig),
    Annulus(AnnulusConfig),
    AnnulusPath(AnnulusPathConfig),
    MinimalC0(MinimalC0Config),
    ChainBound(ChainBoundConfig),
    Rca(RcaConfig),
    Pou(PouConfig),
    TwoPoint(TwoPointConfig),
    Refine(RefineConfig),
    Harnack(HarnackConfig),
}

pub const ESTIMATES: &[&str] = &["vd", "pi", "cap", "fvg", "rvd", "chaining"];
pub const CHECKS: &[&str] = &[
    "chain",
    "ball",
    "annulus",
    "annulus-path",
    "minimal-c0",
    "chain-bound",
    "rca",
    "pou",
    "two-point",
    "refine",
];

impl Operation {
    /// Decodes the config of operation `op`; `pointer` prefixes error paths.
    pub fn parse(op: &str, config: Value, pointer: &str) -> LabResult<Self> {
        fn typed<T: serde::de::DeserializeOwned>(v: Value, pointer: &str) -> LabResult<T> {
            from_value(v).map_err(|e| match e {
                LabError::Config { path, message } => {
                    let full = format!("{pointer}{}", if path == "/" { "" } else { &path });
                    LabError::config(if full.is_empty() { "/".into() } else { full }, message)
                }
                other => other,
            })
        }
        let p = pointer;
        Ok(match op {
            "vd" => Operation::Vd(typed(config, p)?),
            "pi" => Operation::Pi(typed(config, p)?),
            "cap" => Operation::Cap(typed(config, p)?),
            "fvg" => Operation::Fvg(typed(config, p)?),
            "rvd" => Operation::Rvd(typed(config, p)?),
            "chaining" => Operation::Chaining(typed(config, p)?),
            "chain" => Operation::Chain(typed(config, p)?),
            "ball" => Operation::Ball(typed(config, p)?),
            "annulus" => Operation::Annulus(typed(config, p)?),
            "annulus-path" => Operation::AnnulusPath(typed(config, p)?),
            "minimal-c0" => Operation::MinimalC0(typed(config, p)?),
            "chain-bound" => Operation::ChainBound(typed(config, p)?),
            "rca" => Operation::Rca(typed(config, p)?),
            "pou" => Operation::Pou(typed(config, p)?),
            "two-point" => Operation::TwoPoint(typed(config, p)?),
            "refine" => Operation::Refine(typed(config, p)?),
            "harnack" => Operation::Harnack(typed(config, p)?),
            other => return Err(LabError::config(format!("{p}/op"), format!("unknown operation {other:?}"))),
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Operation::Vd(_) => "vd",
            Operation::Pi(_) => "pi",
            Operation::Cap(_) => "cap",
            Operation::Fvg(_) => "fvg",
            Operation::Rvd(_) => "rvd",
            Operation::Chaining(_) => "chaining",
            Operation::Chain(_) => "chain",
            Operation::Ball(_) => "ball",
            Operation::Annulus(_) => "annulus",
            Operation::AnnulusPath(_) => "annulus-path",
            Operation::MinimalC0(_) => "minimal-c0",
            Operation::ChainBound(_) => "chain-bound",
            Operation::Rca(_) => "rca",
            Operation::Pou(_) => "pou",
            Operation::TwoPoint(_) => "two-point",
            Operation::Refine(_) => "refine",
            Operation::Harnack(_) => "harnack",
        }
    }

    /// `(json pointer suffix, value)` for every scale the operation touches.
    pub fn scales(&self) -> Vec<(String, f64)> {
        fn list(name: &str, v: &[f64]) -> Vec<(String, f64)> {
            v.iter().enumerate().map(|(i, &r)| (format!("/{name}/{i}"), r)).collect()
        }
        fn pairs(v: &Option<Vec<(f64, f64)>>) -> Vec<(String, f64)> {
            v.iter()
                .flatten()
                .enumerate()
                .flat_map(|(i, &(r, big))| [(format!("/scale_pairs/{i}/0"), r), (format!("/scale_pairs/{i}/1"), big)])
                .collect()
        }
        match self {
            Operation::Vd(c) => list("radii", &c.radii),
            Operation::Pi(c) => list("radii", &c.radii),
            Operation::Cap(c) => list("radii", &c.radii),
            Operation::Fvg(c) => [pairs(&c.scale_pairs), list("radii", c.radii.as_deref().unwrap_or(&[]))].concat(),
            Operation::Rvd(c) => [pairs(&c.scale_pairs), list("radii", c.radii.as_deref().unwrap_or(&[]))].concat(),
            Operation::Chaining(c) => vec![("/R".into(), c.big_r)],
            Operation::Ball(c) => list("radii", &c.radii),
            Operation::Annulus(c) => list("radii", &c.radii),
            Operation::AnnulusPath(c) => list("radii", &c.radii),
            Operation::MinimalC0(c) => list("radii", &c.radii),
            Operation::ChainBound(c) => match &c.pairs {
                PairsSpec::AtDistance(s) => list("pairs/distances", &s.distances),
                PairsSpec::Explicit(_) => Vec::new(),
            },
            Operation::Rca(c) => list("radii", &c.radii),
            Operation::Harnack(c) => list("radii", &c.radii),
            Operation::TwoPoint(c) => vec![("/R".into(), c.big_r)],
            Operation::Chain(_) | Operation::Pou(_) | Operation::Refine(_) => Vec::new(),
        }
    }
}

/// Splits `{"op": ..., rest}` into the name and the remaining config.
pub fn split_op(mut value: Value, pointer: &str) -> LabResult<(String, Value)> {
    let obj = value
        .as_object_mut()
        .ok_or_else(|| LabError::config(pointer_or_root(pointer), "expected an object"))?;
    let op = match obj.remove("op") {
        Some(Value::String(s)) => s,
        Some(_) => return Err(LabError::config(format!("{pointer}/op"), "expected a string")),
        None => return Err(LabError::config(pointer_or_root(pointer), "missing field `op`")),
    };
    Ok((op, value))
}

fn pointer_or_root(p: &str) -> String {
    if p.is_empty() {
        "/".into()
    } else {
        p.into()
    }
}
