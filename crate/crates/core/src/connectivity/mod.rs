//! Chains and connectivity.
//!
//! An ε-chain in `B` from `x` to `y` is a sequence of points of `B` starting at
//! `x` and ending at `y` whose consecutive points are at distance at most `ε`
//! in the metric of the space, not only along edges. `N_ε(x,y;B)` is the
//! fewest steps of such a chain, `∞` when there is none. Path connectivity
//! uses edges of the graph with both endpoints in the region.

mod bound;
mod maximal;
mod partition;
mod proximity;
mod refine;

pub use bound::{chain_bound_ratio, ChainBoundEntry, ChainBoundReport};
pub use maximal::{truncated_maximal, two_point_check, TwoPointEntry, TwoPointReport};
pub use partition::{build_partition_of_unity, PartitionOfUnity};
pub use proximity::ProximityGraph;
pub(crate) use proximity::ChainSearch;
pub use refine::{refine_chain, RefinedChain};

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::space::{MetricMeasureGraph, RegionSpec, VertexId};
use crate::union_find::UnionFind;

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "status", rename_all = "lowercase"))]
pub enum ChainStatus {
    Found { chain: Vec<VertexId>, length: usize },
    Unreachable,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ChainResult {
    #[cfg_attr(feature = "serde", serde(flatten))]
    pub status: ChainStatus,
    pub epsilon: f64,
    pub container: RegionSpec,
}

impl ChainResult {
    /// `N_ε`, `None` meaning infinite.
    pub fn length(&self) -> Option<usize> {
        match &self.status {
            ChainStatus::Found { length, .. } => Some(*length),
            ChainStatus::Unreachable => None,
        }
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon.is_finite() {
        Ok(())
    } else {
        Err(Error::arg(format!("epsilon must be positive and finite, got {epsilon}")))
    }
}

/// Shortest ε-chain from `x` to `y` inside `container`.
pub fn chain_count(space: &MetricMeasureGraph, x: VertexId, y: VertexId, container: &RegionSpec, epsilon: f64) -> Result<ChainResult> {
    check_epsilon(epsilon)?;
    space.check_vertex(x)?;
    space.check_vertex(y)?;
    let region = container.resolve(space)?;
    let inside = crate::space::mask_of(space.len(), &region);
    if !inside[x] || !inside[y] {
        return Err(Error::arg(format!("vertices {x} and {y} must both lie in the container")));
    }
    let status = match ChainSearch::new(space).shortest(x, y, epsilon, |v| inside[v]) {
        Some(chain) => ChainStatus::Found {
            length: chain.len() - 1,
            chain,
        },
        None => ChainStatus::Unreachable,
    };
    Ok(ChainResult {
        status,
        epsilon,
        container: container.clone(),
    })
}

/// Connectivity of a set of targets inside a container.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Connectivity {
    Pass,
    Fail,
    /// No target vertices.
    Vacuous,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConnectivityEntry {
    pub x: VertexId,
    pub r: f64,
    /// ε for chain checks, the dilation for annulus checks.
    pub parameter: f64,
    pub status: Connectivity,
    pub targets: usize,
    /// Components of the container meeting the targets.
    pub components: usize,
    /// Target vertices in different components.
    pub witness: Option<(VertexId, VertexId)>,
    /// Number of target pairs covered; every pair is decided.
    pub pairs_checked: u64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConnectivityReport {
    pub check: &'static str,
    pub pass: bool,
    pub entries: Vec<ConnectivityEntry>,
}

impl ConnectivityReport {
    fn new(check: &'static str, entries: Vec<ConnectivityEntry>) -> Self {
        let pass = entries.iter().all(|e| e.status != Connectivity::Fail);
        Self { check, pass, entries }
    }
}

/// Classifies `targets` (a subset of the labelled vertices) by component.
fn classify(x: VertexId, r: f64, parameter: f64, targets: &[VertexId], label_of: impl Fn(VertexId) -> usize) -> ConnectivityEntry {
    let t = targets.len() as u64;
    let mut entry = ConnectivityEntry {
        x,
        r,
        parameter,
        status: Connectivity::Vacuous,
        targets: targets.len(),
        components: 0,
        witness: None,
        pairs_checked: t * t.saturating_sub(1) / 2,
    };
    if targets.is_empty() {
        return entry;
    }
    let mut labels: Vec<usize> = targets.iter().map(|&v| label_of(v)).collect();
    let first = labels[0];
    entry.witness = targets.iter().zip(&labels).find(|(_, &l)| l != first).map(|(&v, _)| (targets[0], v));
    labels.sort_unstable();
    labels.dedup();
    entry.components = labels.len();
    entry.status = if labels.len() == 1 { Connectivity::Pass } else { Connectivity::Fail };
    entry
}

/// Component labels of the subgraph induced on `region` by graph edges,
/// indexed by vertex; `usize::MAX` outside the region.
pub fn induced_components(space: &MetricMeasureGraph, region: &[VertexId]) -> Vec<usize> {
    let mut local = vec![usize::MAX; space.len()];
    for (i, &v) in region.iter().enumerate() {
        local[v] = i;
    }
    let mut uf = UnionFind::new(region.len());
    for (i, &v) in region.iter().enumerate() {
        for (u, _) in space.neighbors(v) {
            if local[u] != usize::MAX {
                uf.union(i, local[u]);
            }
        }
    }
    let labels = uf.labels();
    let mut out = vec![usize::MAX; space.len()];
    for (i, &v) in region.iter().enumerate() {
        out[v] = labels[i];
    }
    out
}

fn select(dist: &[f64], keep: impl Fn(f64) -> bool) -> Vec<VertexId> {
    crate::space::select(dist, keep)
}

/// Whether every pair of `B(x,r)` is joined by an ε-chain in `B(x,Ar)`, for
/// each ε. All pairs are decided through the components of the proximity
/// graph.
pub fn ball_chain_connected<E: Executor>(
    space: &MetricMeasureGraph,
    x: VertexId,
    r: f64,
    a: f64,
    epsilons: &[f64],
    exec: &E,
) -> Result<ConnectivityReport> {
    space.check_vertex(x)?;
    if !(a >= 1.0) || !(r > 0.0) {
        return Err(Error::arg("need r > 0 and A >= 1"));
    }
    let dist = space.distances_from(x);
    let ball = select(&dist, |d| d < r);
    let container = select(&dist, |d| d < a * r);
    let mut entries = Vec::with_capacity(epsilons.len());
    for &eps in epsilons {
        check_epsilon(eps)?;
        let prox = ProximityGraph::build(space, &container, eps, exec);
        let labels = prox.components();
        entries.push(classify(x, r, eps, &ball, |v| labels[prox.local(v).unwrap()]));
    }
    Ok(ConnectivityReport::new("ball-chain", entries))
}

/// Whether `B(x,2r) \ B(x,r)` is ε-chain connected inside
/// `B(x,Cr) \ B(x,r/C)`.
pub fn annulus_chain_connected<E: Executor>(
    space: &MetricMeasureGraph,
    x: VertexId,
    r: f64,
    c: f64,
    epsilon: f64,
    exec: &E,
) -> Result<ConnectivityReport> {
    space.check_vertex(x)?;
    check_epsilon(epsilon)?;
    if !(c >= 2.0) || !(r > 0.0) {
        return Err(Error::arg("need r > 0 and C >= 2"));
    }
    let dist = space.distances_from(x);
    let targets = select(&dist, |d| d >= r && d < 2.0 * r);
    let container = select(&dist, |d| d >= r / c && d < c * r);
    let prox = ProximityGraph::build(space, &container, epsilon, exec);
    let labels = prox.components();
    let entry = classify(x, r, epsilon, &targets, |v| labels[prox.local(v).unwrap()]);
    Ok(ConnectivityReport::new("annulus-chain", vec![entry]))
}

/// Whether `B(x,2r) \ B(x,r)` lies in one component of the subgraph induced
/// on `B(x,C₀r) \ B(x,r/C₀)`.
pub fn annulus_path_connected(space: &MetricMeasureGraph, x: VertexId, r: f64, c0: f64) -> Result<ConnectivityEntry> {
    space.check_vertex(x)?;
    let dist = space.distances_from(x);
    annulus_path_with(space, &dist, x, r, c0)
}

fn annulus_path_with(space: &MetricMeasureGraph, dist: &[f64], x: VertexId, r: f64, c0: f64) -> Result<ConnectivityEntry> {
    if !(c0 >= 2.0) || !(r > 0.0) {
        return Err(Error::arg("need r > 0 and C0 >= 2"));
    }
    let targets = select(dist, |d| d >= r && d < 2.0 * r);
    let container = select(dist, |d| d >= r / c0 && d < c0 * r);
    let labels = induced_components(space, &container);
    Ok(classify(x, r, c0, &targets, |v| labels[v]))
}

/// Smallest grid `C₀` passing for one `(x, r)`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MinimalC0Entry {
    pub x: VertexId,
    pub r: f64,
    /// `None` when no grid value passes.
    pub c0: Option<f64>,
    /// Components at the largest grid value when none passes.
    pub components: usize,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MinimalC0Report {
    /// Smallest grid value passing for every tuple; `None` is the infinite
    /// marker.
    pub c0: Option<f64>,
    /// The same restricted to each radius, in radius order.
    pub per_radius: Vec<(f64, Option<f64>)>,
    pub entries: Vec<MinimalC0Entry>,
    pub grid: Vec<f64>,
}

/// Quantifies the dilation needed for annulus path connectivity.
///
/// Passing is monotone in `C₀` since the container grows with it, so each
/// tuple stops at its first passing grid value.
pub fn minimal_annulus_constant<E: Executor>(
    space: &MetricMeasureGraph,
    centers: &[VertexId],
    radii: &[f64],
    grid: &[f64],
    exec: &E,
) -> Result<MinimalC0Report> {
    if grid.is_empty() || grid.windows(2).any(|w| w[1] <= w[0]) || grid[0] < 2.0 {
        return Err(Error::arg("C0 grid must be ascending and start at 2 or more"));
    }
    for &x in centers {
        space.check_vertex(x)?;
    }
    let rows = exec.map(centers, |&x| -> Result<Vec<MinimalC0Entry>> {
        let dist = space.distances_from(x);
        let mut out = Vec::with_capacity(radii.len());
        for &r in radii {
            let mut found = None;
            let mut components = 0;
            for &c0 in grid {
                let e = annulus_path_with(space, &dist, x, r, c0)?;
                components = e.components;
                if e.status != Connectivity::Fail {
                    found = Some(c0);
                    break;
                }
            }
            out.push(MinimalC0Entry { x, r, c0: found, components });
        }
        Ok(out)
    });
    let mut entries = Vec::new();
    for row in rows {
        entries.extend(row?);
    }
    let worst = |it: &mut dyn Iterator<Item = &MinimalC0Entry>| -> Option<f64> {
        let mut acc = Some(f64::NEG_INFINITY);
        for e in it {
            acc = match (acc, e.c0) {
                (Some(a), Some(b)) => Some(a.max(b)),
                _ => None,
            };
        }
        acc
    };
    let c0 = worst(&mut entries.iter());
    let per_radius = radii.iter().map(|&r| (r, worst(&mut entries.iter().filter(|e| e.r == r)))).collect();
    Ok(MinimalC0Report {
        c0,
        per_radius,
        entries,
        grid: grid.to_vec(),
    })
}

/// Relatively connected annuli about `o`: for each `r > A`, the discrete
/// sphere `{v : |d(o,v) − r| < h/2}`, `h` the smallest edge length, must lie
/// in one component of the subgraph induced on `B(o,Ar) \ B(o,r/A)`.
pub fn rca_check(space: &MetricMeasureGraph, o: VertexId, a: f64, radii: &[f64]) -> Result<ConnectivityReport> {
    space.check_vertex(o)?;
    if !(a > 1.0) {
        return Err(Error::arg(format!("A must exceed 1, got {a}")));
    }
    let dist = space.distances_from(o);
    let half = 0.5 * space.min_edge_length();
    let mut entries = Vec::new();
    for &r in radii.iter().filter(|&&r| r > a) {
        let sphere = select(&dist, |d| (d - r).abs() < half);
        let container = select(&dist, |d| d >= r / a && d < a * r);
        let labels = induced_components(space, &container);
        entries.push(classify(o, r, a, &sphere, |v| labels[v]));
    }
    Ok(ConnectivityReport::new("rca", entries))
}
