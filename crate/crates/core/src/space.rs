//! The discrete space: a finite weighted graph with a vertex measure, edge
//! conductances and a metric.

use alloc::collections::{BTreeSet, BinaryHeap};
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::error::{Error, Result};
use crate::math;
use crate::union_find::UnionFind;

pub type VertexId = usize;

/// How distances are measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum MetricMode {
    /// Shortest-path distance with per-edge lengths.
    Graph,
    /// Euclidean distance between vertex coordinates.
    Euclid,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub u: VertexId,
    pub v: VertexId,
    pub conductance: f64,
    /// Length used by the graph metric. In Euclidean mode this is the
    /// distance between the endpoints.
    pub length: f64,
}

impl Edge {
    pub fn other(&self, w: VertexId) -> VertexId {
        if w == self.u {
            self.v
        } else {
            self.u
        }
    }
}

/// A finite metric measure Dirichlet space.
///
/// Immutable once built; every query is a pure read.
#[derive(Debug, Clone)]
pub struct MetricMeasureGraph {
    measure: Vec<f64>,
    edges: Vec<Edge>,
    offsets: Vec<usize>,
    incidence: Vec<(VertexId, usize)>,
    metric: MetricMode,
    dim: usize,
    coords: Vec<f64>,
    component: Vec<usize>,
    component_count: usize,
    min_edge_length: f64,
    parallel_edges: bool,
}

/// Incrementally assembles a [`MetricMeasureGraph`].
#[derive(Debug, Clone)]
pub struct GraphBuilder {
    metric: MetricMode,
    measure: Vec<f64>,
    coords: Vec<Option<Vec<f64>>>,
    edges: Vec<Edge>,
    seen: BTreeSet<(VertexId, VertexId)>,
    allow_parallel: bool,
}

impl GraphBuilder {
    pub fn new(metric: MetricMode) -> Self {
        Self {
            metric,
            measure: Vec::new(),
            coords: Vec::new(),
            edges: Vec::new(),
            seen: BTreeSet::new(),
            allow_parallel: false,
        }
    }

    pub fn with_capacity(metric: MetricMode, vertices: usize, edges: usize) -> Self {
        let mut b = Self::new(metric);
        b.measure.reserve(vertices);
        b.coords.reserve(vertices);
        b.edges.reserve(edges);
        b
    }

    /// Permit several edges between the same pair of vertices. Their
    /// conductances act in parallel. Such graphs cannot be written to the
    /// `.mmg` format.
    pub fn allow_parallel_edges(mut self, allow: bool) -> Self {
        self.allow_parallel = allow;
        self
    }

    pub fn vertex_count(&self) -> usize {
        self.measure.len()
    }

    pub fn add_vertex(&mut self, measure: f64) -> Result<VertexId> {
        check_positive("vertex measure", measure)?;
        self.measure.push(measure);
        self.coords.push(None);
        Ok(self.measure.len() - 1)
    }

    pub fn add_vertex_at(&mut self, measure: f64, coords: &[f64]) -> Result<VertexId> {
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::arg("vertex coordinates must be finite"));
        }
        let id = self.add_vertex(measure)?;
        self.coords[id] = Some(coords.to_vec());
        Ok(id)
    }

    /// Adds an edge of unit length (graph metric) or Euclidean length.
    pub fn add_edge(&mut self, u: VertexId, v: VertexId, conductance: f64) -> Result<usize> {
        self.push_edge(u, v, conductance, None)
    }

    pub fn add_edge_with_length(
        &mut self,
        u: VertexId,
        v: VertexId,
        conductance: f64,
        length: f64,
    ) -> Result<usize> {
        check_positive("edge length", length)?;
        self.push_edge(u, v, conductance, Some(length))
    }

    fn push_edge(&mut self, u: VertexId, v: VertexId, conductance: f64, length: Option<f64>) -> Result<usize> {
        let n = self.measure.len();
        for id in [u, v] {
            if id >= n {
                return Err(Error::InvalidVertex { id, len: n });
            }
        }
        if u == v {
            return Err(Error::arg(format!("self loop at vertex {u}")));
        }
        check_positive("edge conductance", conductance)?;
        let key = (u.min(v), u.max(v));
        if !self.seen.insert(key) && !self.allow_parallel {
            return Err(Error::arg(format!("duplicate edge {} {}", key.0, key.1)));
        }
        self.edges.push(Edge {
            u,
            v,
            conductance,
            length: length.unwrap_or(f64::NAN),
        });
        Ok(self.edges.len() - 1)
    }

    pub fn build(self) -> Result<MetricMeasureGraph> {
        let n = self.measure.len();
        let any_coords = self.coords.iter().any(Option::is_some);
        let dim = self.coords.iter().flatten().map(Vec::len).next().unwrap_or(0);
        let mut coords = Vec::new();
        if any_coords {
            coords.reserve(n * dim);
            for (id, c) in self.coords.iter().enumerate() {
                match c {
                    Some(c) if c.len() == dim => coords.extend_from_slice(c),
                    Some(_) => return Err(Error::arg(format!("vertex {id} has {} coordinates, expected {dim}", c.as_ref().map_or(0, Vec::len)))),
                    None => return Err(Error::arg(format!("vertex {id} has no coordinates"))),
                }
            }
        }
        if self.metric == MetricMode::Euclid && (!any_coords || dim == 0) {
            return Err(Error::arg("euclidean metric requires coordinates on every vertex"));
        }

        let mut edges = self.edges;
        for e in edges.iter_mut() {
            let euclid = if any_coords {
                Some(euclidean(&coords[e.u * dim..(e.u + 1) * dim], &coords[e.v * dim..(e.v + 1) * dim]))
            } else {
                None
            };
            match self.metric {
                MetricMode::Graph => {
                    if e.length.is_nan() {
                        e.length = 1.0;
                    }
                }
                MetricMode::Euclid => {
                    let d = euclid.unwrap_or(f64::NAN);
                    if d <= 0.0 {
                        return Err(Error::arg(format!("edge {} {} joins coincident points", e.u, e.v)));
                    }
                    e.length = d;
                }
            }
        }

        let mut degree = vec![0usize; n];
        for e in &edges {
            degree[e.u] += 1;
            degree[e.v] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut incidence = vec![(0usize, 0usize); offsets[n]];
        let mut fill = offsets.clone();
        for (k, e) in edges.iter().enumerate() {
            incidence[fill[e.u]] = (e.v, k);
            fill[e.u] += 1;
            incidence[fill[e.v]] = (e.u, k);
            fill[e.v] += 1;
        }
        for v in 0..n {
            incidence[offsets[v]..offsets[v + 1]].sort_unstable();
        }

        let mut uf = UnionFind::new(n);
        for e in &edges {
            uf.union(e.u, e.v);
        }
        let component_count = uf.set_count();
        let component = uf.labels();
        let min_edge_length = edges.iter().map(|e| e.length).fold(f64::INFINITY, f64::min);
        let parallel_edges = self.seen.len() != edges.len();

        Ok(MetricMeasureGraph {
            measure: self.measure,
            edges,
            offsets,
            incidence,
            metric: self.metric,
            dim: if any_coords { dim } else { 0 },
            coords,
            component,
            component_count,
            min_edge_length,
            parallel_edges,
        })
    }
}

fn check_positive(what: &str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::arg(format!("{what} must be positive and finite, got {x}")))
    }
}

pub(crate) fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    math::sqrt(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum())
}

impl MetricMeasureGraph {
    pub fn len(&self) -> usize {
        self.measure.len()
    }

    pub fn is_empty(&self) -> bool {
        self.measure.is_empty()
    }

    pub fn metric(&self) -> MetricMode {
        self.metric
    }

    pub fn measure(&self, v: VertexId) -> f64 {
        self.measure[v]
    }

    pub fn measures(&self) -> &[f64] {
        &self.measure
    }

    pub fn total_measure(&self) -> f64 {
        self.measure.iter().sum()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_parallel_edges(&self) -> bool {
        self.parallel_edges
    }

    /// `(neighbor, edge)` pairs incident to `v`, ordered by neighbor id.
    pub fn neighbors(&self, v: VertexId) -> impl Iterator<Item = (VertexId, &Edge)> + '_ {
        self.incidence[self.offsets[v]..self.offsets[v + 1]]
            .iter()
            .map(move |&(u, k)| (u, &self.edges[k]))
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    /// Sum of conductances incident to `v`.
    pub fn weighted_degree(&self, v: VertexId) -> f64 {
        self.neighbors(v).map(|(_, e)| e.conductance).sum()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn has_coords(&self) -> bool {
        self.dim > 0
    }

    pub fn coords(&self, v: VertexId) -> Option<&[f64]> {
        (self.dim > 0).then(|| &self.coords[v * self.dim..(v + 1) * self.dim])
    }

    pub fn component_of(&self, v: VertexId) -> usize {
        self.component[v]
    }

    pub fn component_count(&self) -> usize {
        self.component_count
    }

    pub fn is_connected(&self) -> bool {
        self.component_count <= 1
    }

    /// Smallest edge length in the space's own metric.
    pub fn min_edge_length(&self) -> f64 {
        self.min_edge_length
    }

    pub fn check_vertex(&self, v: VertexId) -> Result<()> {
        if v < self.len() {
            Ok(())
        } else {
            Err(Error::InvalidVertex { id: v, len: self.len() })
        }
    }

    /// Same graph and metric with new measure and conductances.
    pub fn reweighted(&self, measure: Vec<f64>, conductances: &[f64]) -> Result<Self> {
        if measure.len() != self.len() || conductances.len() != self.edge_count() {
            return Err(Error::arg("reweighting vectors do not match the graph"));
        }
        for &m in &measure {
            check_positive("vertex measure", m)?;
        }
        for &c in conductances {
            check_positive("edge conductance", c)?;
        }
        let mut out = self.clone();
        out.measure = measure;
        for (e, &c) in out.edges.iter_mut().zip(conductances) {
            e.conductance = c;
        }
        Ok(out)
    }

    /// Distances from `x` to every vertex; unreachable vertices are at
    /// `f64::INFINITY` under the graph metric.
    pub fn distances_from(&self, x: VertexId) -> Vec<f64> {
        match self.metric {
            MetricMode::Euclid => {
                let p = self.coords(x).unwrap();
                (0..self.len()).map(|v| euclidean(p, self.coords(v).unwrap())).collect()
            }
            MetricMode::Graph => {
                let mut dist = vec![f64::INFINITY; self.len()];
                let mut heap = BinaryHeap::new();
                dist[x] = 0.0;
                heap.push(HeapItem(0.0, x));
                while let Some(HeapItem(d, v)) = heap.pop() {
                    if d > dist[v] {
                        continue;
                    }
                    for (u, e) in self.neighbors(v) {
                        let nd = d + e.length;
                        if nd < dist[u] {
                            dist[u] = nd;
                            heap.push(HeapItem(nd, u));
                        }
                    }
                }
                dist
            }
        }
    }

    pub fn distance(&self, x: VertexId, y: VertexId) -> f64 {
        match self.metric {
            MetricMode::Euclid => euclidean(self.coords(x).unwrap(), self.coords(y).unwrap()),
            MetricMode::Graph => {
                if x == y {
                    return 0.0;
                }
                let mut search = Neighborhood::new(self);
                search.distance(x, y)
            }
        }
    }

    /// `B(x,r) = {y : d(x,y) < r}`, ascending ids.
    pub fn ball(&self, x: VertexId, r: f64) -> Result<Vec<VertexId>> {
        self.check_vertex(x)?;
        if !(r > 0.0) {
            return Err(Error::arg(format!("ball radius must be positive, got {r}")));
        }
        Ok(select(&self.distances_from(x), |d| d < r))
    }

    /// `{y : d(x,y) <= r}`, the closure of the open ball.
    pub fn closed_ball(&self, x: VertexId, r: f64) -> Result<Vec<VertexId>> {
        self.check_vertex(x)?;
        Ok(select(&self.distances_from(x), |d| d <= r))
    }

    /// `B(x,outer) \ B(x,inner) = {y : inner <= d(x,y) < outer}`.
    pub fn annulus(&self, x: VertexId, inner: f64, outer: f64) -> Result<Vec<VertexId>> {
        self.check_vertex(x)?;
        Ok(select(&self.distances_from(x), |d| d >= inner && d < outer))
    }

    pub fn measure_sum(&self, vertices: &[VertexId]) -> f64 {
        vertices.iter().map(|&v| self.measure[v]).sum()
    }

    pub fn measure_of(&self, region: &RegionSpec) -> Result<f64> {
        Ok(self.measure_sum(&region.resolve(self)?))
    }

    /// Dirichlet energy `E(f,f)`.
    pub fn energy(&self, f: &[f64]) -> f64 {
        self.edges
            .iter()
            .map(|e| {
                let g = f[e.u] - f[e.v];
                e.conductance * g * g
            })
            .sum()
    }

    /// Per-vertex energy measure `Γ(f,f)({v}) = ½ Σ_{u~v} c_uv (f(u)-f(v))²`.
    pub fn energy_measure_vector(&self, f: &[f64]) -> Result<Vec<f64>> {
        if f.len() != self.len() {
            return Err(Error::arg("function length does not match the graph"));
        }
        if f.iter().any(|x| !x.is_finite()) {
            return Err(Error::arg("function has non-finite entries"));
        }
        let mut gamma = vec![0.0; self.len()];
        for e in &self.edges {
            let g = f[e.u] - f[e.v];
            let half = 0.5 * e.conductance * g * g;
            gamma[e.u] += half;
            gamma[e.v] += half;
        }
        Ok(gamma)
    }

    /// `Γ(f,f)(region)`, summed in ascending vertex order.
    pub fn energy_measure(&self, f: &[f64], region: &[VertexId]) -> Result<f64> {
        let gamma = self.energy_measure_vector(f)?;
        let mut sorted = region.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        Ok(sorted.iter().map(|&v| gamma[v]).sum())
    }

    /// Maximal `s`-separated subset of `region`, chosen greedily in ascending
    /// id order. Every region vertex lies at distance `< s` from the net.
    pub fn epsilon_net(&self, region: &[VertexId], s: f64) -> Result<Vec<VertexId>> {
        if region.is_empty() {
            return Err(Error::arg("epsilon net of an empty region"));
        }
        if !(s > 0.0) {
            return Err(Error::arg(format!("net separation must be positive, got {s}")));
        }
        for &v in region {
            self.check_vertex(v)?;
        }
        let mut sorted = region.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        let mut covered = vec![false; self.len()];
        let mut net = Vec::new();
        let mut search = Neighborhood::new(self);
        let mut near = Vec::new();
        for v in sorted {
            if covered[v] {
                continue;
            }
            net.push(v);
            search.within(v, s, &mut near);
            for &(u, d) in &near {
                if d < s {
                    covered[u] = true;
                }
            }
        }
        Ok(net)
    }
}

pub(crate) fn select(dist: &[f64], keep: impl Fn(f64) -> bool) -> Vec<VertexId> {
    dist.iter()
        .enumerate()
        .filter(|(_, &d)| keep(d))
        .map(|(v, _)| v)
        .collect()
}

/// Min-heap entry for Dijkstra.
#[derive(Debug, Clone, Copy)]
pub(crate) struct HeapItem(pub f64, pub VertexId);

impl PartialEq for HeapItem {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for HeapItem {}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

/// Reusable scratch space for bounded distance searches.
pub struct Neighborhood<'a> {
    space: &'a MetricMeasureGraph,
    dist: Vec<f64>,
    touched: Vec<VertexId>,
    heap: BinaryHeap<HeapItem>,
}

impl<'a> Neighborhood<'a> {
    pub fn new(space: &'a MetricMeasureGraph) -> Self {
        Self {
            space,
            dist: vec![f64::INFINITY; space.len()],
            touched: Vec::new(),
            heap: BinaryHeap::new(),
        }
    }

    pub fn space(&self) -> &'a MetricMeasureGraph {
        self.space
    }

    /// Collects every `(v, d(x,v))` with `d(x,v) <= radius`, ascending by id.
    pub fn within(&mut self, x: VertexId, radius: f64, out: &mut Vec<(VertexId, f64)>) {
        out.clear();
        match self.space.metric {
            MetricMode::Euclid => {
                let p = self.space.coords(x).unwrap();
                for v in 0..self.space.len() {
                    let d = euclidean(p, self.space.coords(v).unwrap());
                    if d <= radius {
                        out.push((v, d));
                    }
                }
            }
            MetricMode::Graph => {
                self.run(x, radius, None);
                for &v in &self.touched {
                    if self.dist[v] <= radius {
                        out.push((v, self.dist[v]));
                    }
                }
                out.sort_unstable_by_key(|p| p.0);
                self.reset();
            }
        }
    }

    /// Exact distance, stopping as soon as `y` is settled.
    pub fn distance(&mut self, x: VertexId, y: VertexId) -> f64 {
        match self.space.metric {
            MetricMode::Euclid => euclidean(self.space.coords(x).unwrap(), self.space.coords(y).unwrap()),
            MetricMode::Graph => {
                self.run(x, f64::INFINITY, Some(y));
                let d = self.dist[y];
                self.reset();
                d
            }
        }
    }

    fn run(&mut self, x: VertexId, radius: f64, target: Option<VertexId>) {
        self.dist[x] = 0.0;
        self.touched.push(x);
        self.heap.push(HeapItem(0.0, x));
        while let Some(HeapItem(d, v)) = self.heap.pop() {
            if d > self.dist[v] {
                continue;
            }
            if Some(v) == target {
                break;
            }
            for (u, e) in self.space.neighbors(v) {
                let nd = d + e.length;
                if nd <= radius && nd < self.dist[u] {
                    if self.dist[u] == f64::INFINITY {
                        self.touched.push(u);
                    }
                    self.dist[u] = nd;
                    self.heap.push(HeapItem(nd, u));
                }
            }
        }
    }

    fn reset(&mut self) {
        for &v in &self.touched {
            self.dist[v] = f64::INFINITY;
        }
        self.touched.clear();
        self.heap.clear();
    }
}

/// A vertex region described by geometry or by explicit listing.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "lowercase"))]
pub enum RegionSpec {
    /// `B(center, radius)`, strict inequality.
    Ball { center: VertexId, radius: f64 },
    /// `B(center, outer) \ B(center, inner)`.
    Annulus { center: VertexId, inner: f64, outer: f64 },
    Explicit { vertices: Vec<VertexId> },
    /// Every vertex of the space.
    All,
}

impl RegionSpec {
    /// Vertex ids in ascending order.
    pub fn resolve(&self, space: &MetricMeasureGraph) -> Result<Vec<VertexId>> {
        match self {
            RegionSpec::Ball { center, radius } => space.ball(*center, *radius),
            RegionSpec::Annulus { center, inner, outer } => space.annulus(*center, *inner, *outer),
            RegionSpec::Explicit { vertices } => {
                for &v in vertices {
                    space.check_vertex(v)?;
                }
                let mut out = vertices.clone();
                out.sort_unstable();
                out.dedup();
                Ok(out)
            }
            RegionSpec::All => Ok((0..space.len()).collect()),
        }
    }
}

/// Membership mask over the vertices of a space.
pub fn mask_of(len: usize, vertices: &[VertexId]) -> Vec<bool> {
    let mut mask = vec![false; len];
    for &v in vertices {
        mask[v] = true;
    }
    mask
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{generate, GeneratorSpec};
    use proptest::prelude::*;

    fn lattice(side: usize) -> MetricMeasureGraph {
        generate(&GeneratorSpec::lattice(2, side)).unwrap()
    }

    #[test]
    fn small_ball_is_center_only() {
        let g = lattice(5);
        assert_eq!(g.ball(12, 0.5).unwrap(), vec![12]);
    }

    #[test]
    fn interior_unit_ball_has_five_vertices() {
        let g = lattice(5);
        let b = g.ball(12, 1.5).unwrap();
        assert_eq!(b, vec![7, 11, 12, 13, 17]);
        assert_eq!(g.measure_of(&RegionSpec::Ball { center: 12, radius: 1.5 }).unwrap(), 5.0);
    }

    #[test]
    fn ball_boundary_is_strict() {
        let g = lattice(5);
        assert_eq!(g.ball(12, 1.0).unwrap(), vec![12]);
        assert_eq!(g.closed_ball(12, 1.0).unwrap().len(), 5);
    }

    #[test]
    fn invalid_vertex_and_radius_are_rejected() {
        let g = lattice(3);
        assert!(matches!(g.ball(9, 1.0), Err(Error::InvalidVertex { id: 9, len: 9 })));
        assert!(g.ball(0, 0.0).is_err());
    }

    #[test]
    fn empty_annulus_has_zero_measure() {
        let g = lattice(5);
        let region = RegionSpec::Annulus { center: 12, inner: 3.0, outer: 2.0 };
        assert_eq!(g.measure_of(&region).unwrap(), 0.0);
    }

    #[test]
    fn gasket_ball_matches_brute_force_dijkstra() {
        let g = generate(&GeneratorSpec::sierpinski_gasket(3)).unwrap();
        // Distances in units of the finest edge.
        let h = g.min_edge_length();
        let r = 2.5 * h;
        // Independent Bellman-Ford relaxation.
        let n = g.len();
        let mut dist = vec![f64::INFINITY; n];
        dist[0] = 0.0;
        for _ in 0..n {
            for e in g.edges() {
                if dist[e.u] + e.length < dist[e.v] {
                    dist[e.v] = dist[e.u] + e.length;
                }
                if dist[e.v] + e.length < dist[e.u] {
                    dist[e.u] = dist[e.v] + e.length;
                }
            }
        }
        let expected: Vec<usize> = (0..n).filter(|&v| dist[v] < r).collect();
        assert_eq!(g.ball(0, r).unwrap(), expected);
        assert_eq!(expected.len(), 6);
    }

    #[test]
    fn greedy_net_on_path() {
        let g = generate(&GeneratorSpec::path(10)).unwrap();
        let all: Vec<usize> = (0..11).collect();
        assert_eq!(g.epsilon_net(&all, 2.0).unwrap(), vec![0, 2, 4, 6, 8, 10]);
        assert_eq!(g.epsilon_net(&all, 50.0).unwrap(), vec![0]);
        assert!(g.epsilon_net(&[], 1.0).is_err());
    }

    #[test]
    fn net_is_separated_and_covering() {
        let g = lattice(16);
        let all: Vec<usize> = (0..g.len()).collect();
        let net = g.epsilon_net(&all, 4.0).unwrap();
        let dists: Vec<Vec<f64>> = net.iter().map(|&z| g.distances_from(z)).collect();
        for i in 0..net.len() {
            for j in 0..i {
                assert!(dists[i][net[j]] >= 4.0);
            }
        }
        for v in 0..g.len() {
            assert!(dists.iter().any(|d| d[v] < 4.0), "vertex {v} uncovered");
        }
    }

    #[test]
    fn energy_measure_hand_values() {
        let g = generate(&GeneratorSpec::path(2)).unwrap();
        let f = [0.0, 1.0, 1.0];
        assert_eq!(g.energy_measure(&f, &[1]).unwrap(), 0.5);
        assert_eq!(g.energy_measure(&[3.0; 3], &[0, 1, 2]).unwrap(), 0.0);
        assert!(g.energy_measure(&[0.0, f64::NAN, 1.0], &[1]).is_err());
    }

    #[test]
    fn duplicate_edges_and_bad_weights_rejected() {
        let mut b = GraphBuilder::new(MetricMode::Graph);
        b.add_vertex(1.0).unwrap();
        b.add_vertex(1.0).unwrap();
        b.add_edge(0, 1, 1.0).unwrap();
        assert!(b.add_edge(1, 0, 2.0).is_err());
        assert!(b.add_edge(0, 1, 0.0).is_err());
        assert!(b.add_vertex(-1.0).is_err());
    }

    #[test]
    fn components_are_recorded() {
        let mut b = GraphBuilder::new(MetricMode::Graph);
        for _ in 0..4 {
            b.add_vertex(1.0).unwrap();
        }
        b.add_edge(0, 1, 1.0).unwrap();
        b.add_edge(2, 3, 1.0).unwrap();
        let g = b.build().unwrap();
        assert_eq!(g.component_count(), 2);
        assert_eq!(g.distances_from(0)[2], f64::INFINITY);
    }

    fn gasket_and_random_f() -> impl Strategy<Value = (u8, Vec<f64>)> {
        (1u8..4).prop_flat_map(|level| {
            let n = 3 * (3usize.pow(level as u32) + 1) / 2;
            (Just(level), proptest::collection::vec(-5.0f64..5.0, n))
        })
    }

    proptest! {
        #[test]
        fn energy_measure_partitions_total_energy((level, f) in gasket_and_random_f(), split in 1usize..14) {
            let g = generate(&GeneratorSpec::sierpinski_gasket(level as u32)).unwrap();
            let left: Vec<usize> = (0..g.len()).filter(|v| v % split == 0).collect();
            let right: Vec<usize> = (0..g.len()).filter(|v| v % split != 0).collect();
            let total = g.energy(&f);
            let a = g.energy_measure(&f, &left).unwrap();
            let b = g.energy_measure(&f, &right).unwrap();
            prop_assert!(math::rel_diff(a + b, total) < 1e-12 || total == 0.0);
            let all: Vec<usize> = (0..g.len()).collect();
            prop_assert!(math::rel_diff(g.energy_measure(&f, &all).unwrap(), total) < 1e-12);
        }

        #[test]
        fn balls_are_monotone(x in 0usize..100, r in 0.1f64..12.0, dr in 0.0f64..5.0) {
            let g = lattice(10);
            let small = g.ball(x, r).unwrap();
            let big = g.ball(x, r + dr).unwrap();
            prop_assert!(small.iter().all(|v| big.binary_search(v).is_ok()));
        }

    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(4))]

        #[test]
        fn metric_axioms_hold(triples in proptest::collection::vec((0usize..169, 0usize..169, 0usize..169), 1000)) {
            for g in [lattice(13), generate(&GeneratorSpec::sierpinski_gasket(3)).unwrap()] {
                let n = g.len();
                let table: Vec<Vec<f64>> = (0..n).map(|v| g.distances_from(v)).collect();
                for &(a, b, c) in &triples {
                    let (a, b, c) = (a % n, b % n, c % n);
                    let dab = table[a][b];
                    prop_assert!((dab - table[b][a]).abs() <= 1e-12);
                    prop_assert!(dab <= table[a][c] + table[c][b] + 1e-12);
                    prop_assert!((g.distance(a, b) - dab).abs() <= 1e-12);
                }
            }
        }
    }
}
