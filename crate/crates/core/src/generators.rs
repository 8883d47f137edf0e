//! Example spaces: lattices, paths, cycles, fractal graph approximations,
//! point gluings and radial weights.
//!
//! Vertex numbering is stable:
//!
//! * `path(n)`: vertices `0..=n` in order along the path, coordinate `i`.
//! * `cycle(n)`: vertices `0..n` around the cycle.
//! * `lattice(d, side)`: vertex `i0 + side*i1 + side^2*i2 + ...`.
//! * `sierpinski_gasket(L)`: the three corners are `0, 1, 2` (left, right,
//!   top); the rest in row-major order of their triangular coordinates,
//!   bottom row first. Edges have length `2^-L` so that every level spans
//!   the unit triangle.
//! * `vicsek_tree(L)`: the hub is `0`; the rest in row-major order, bottom
//!   row first. Edges have unit length; the arms have length `3^L`.
//! * `sierpinski_carpet(L)`: the retained cells of the `3^L x 3^L` grid in
//!   row-major order, bottom row first.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::space::{GraphBuilder, MetricMeasureGraph, MetricMode, VertexId};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "shape", rename_all = "snake_case"))]
pub enum Shape {
    Lattice { d: u32, side: usize },
    Path { n: usize },
    Cycle { n: usize },
    SierpinskiGasket { level: u32 },
    SierpinskiCarpet { level: u32 },
    VicsekTree { level: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GeneratorSpec {
    #[cfg_attr(feature = "serde", serde(flatten))]
    pub shape: Shape,
    #[cfg_attr(feature = "serde", serde(default = "one"))]
    pub measure: f64,
    #[cfg_attr(feature = "serde", serde(default = "one"))]
    pub conductance: f64,
    /// Defaults to the graph metric.
    #[cfg_attr(feature = "serde", serde(default))]
    pub metric: Option<MetricMode>,
}

#[cfg(feature = "serde")]
fn one() -> f64 {
    1.0
}

impl GeneratorSpec {
    pub fn new(shape: Shape) -> Self {
        Self {
            shape,
            measure: 1.0,
            conductance: 1.0,
            metric: None,
        }
    }

    pub fn path(n: usize) -> Self {
        Self::new(Shape::Path { n })
    }

    pub fn cycle(n: usize) -> Self {
        Self::new(Shape::Cycle { n })
    }

    pub fn lattice(d: u32, side: usize) -> Self {
        Self::new(Shape::Lattice { d, side })
    }

    pub fn sierpinski_gasket(level: u32) -> Self {
        Self::new(Shape::SierpinskiGasket { level })
    }

    pub fn sierpinski_carpet(level: u32) -> Self {
        Self::new(Shape::SierpinskiCarpet { level })
    }

    pub fn vicsek_tree(level: u32) -> Self {
        Self::new(Shape::VicsekTree { level })
    }

    pub fn with_metric(mut self, metric: MetricMode) -> Self {
        self.metric = Some(metric);
        self
    }

    /// Closed-form `(vertices, edges)`.
    pub fn counts(&self) -> Option<(u64, u64)> {
        match self.shape {
            Shape::Path { n } => Some((n as u64 + 1, n as u64)),
            Shape::Cycle { n } => Some((n as u64, n as u64)),
            Shape::Lattice { d, side } => {
                let s = side as u64;
                let v = s.checked_pow(d)?;
                let e = (d as u64).checked_mul(s.saturating_sub(1))?.checked_mul(s.checked_pow(d.saturating_sub(1))?)?;
                Some((v, e))
            }
            Shape::SierpinskiGasket { level } => {
                let p = 3u64.checked_pow(level)?;
                Some((3 * (p + 1) / 2, p.checked_mul(3)?))
            }
            Shape::VicsekTree { level } => {
                let p = 5u64.checked_pow(level)?;
                Some((4 * p + 1, 4 * p))
            }
            Shape::SierpinskiCarpet { level } => {
                let v = 8u64.checked_pow(level)?;
                // Eight copies joined along eight full sides.
                let mut e = 0u64;
                for k in 0..level {
                    e = e.checked_mul(8)?.checked_add(8 * 3u64.pow(k))?;
                }
                Some((v, e))
            }
        }
    }
}

/// Bounds checked before anything is allocated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GeneratorLimits {
    pub max_vertices: u64,
}

impl Default for GeneratorLimits {
    fn default() -> Self {
        Self { max_vertices: 4_000_000 }
    }
}

pub fn generate(spec: &GeneratorSpec) -> Result<MetricMeasureGraph> {
    generate_with_limits(spec, GeneratorLimits::default())
}

pub fn generate_with_limits(spec: &GeneratorSpec, limits: GeneratorLimits) -> Result<MetricMeasureGraph> {
    let (vertices, _) = spec.counts().ok_or(Error::ResourceLimit {
        limit: "max_vertices",
        requested: u64::MAX,
        allowed: limits.max_vertices,
    })?;
    if vertices > limits.max_vertices {
        return Err(Error::ResourceLimit {
            limit: "max_vertices",
            requested: vertices,
            allowed: limits.max_vertices,
        });
    }
    for (what, x) in [("measure", spec.measure), ("conductance", spec.conductance)] {
        if !(x.is_finite() && x > 0.0) {
            return Err(Error::arg(format!("base {what} must be positive and finite, got {x}")));
        }
    }
    let metric = spec.metric.unwrap_or(MetricMode::Graph);
    let (m, c) = (spec.measure, spec.conductance);
    match spec.shape {
        Shape::Path { n } => {
            if n == 0 {
                return Err(Error::arg("path needs at least one edge"));
            }
            let mut b = GraphBuilder::with_capacity(metric, n + 1, n);
            for i in 0..=n {
                b.add_vertex_at(m, &[i as f64])?;
            }
            for i in 0..n {
                b.add_edge(i, i + 1, c)?;
            }
            b.build()
        }
        Shape::Cycle { n } => {
            if n < 3 {
                return Err(Error::arg("cycle needs at least three vertices"));
            }
            let mut b = GraphBuilder::with_capacity(metric, n, n);
            for i in 0..n {
                let t = 2.0 * core::f64::consts::PI * i as f64 / n as f64;
                // Unit chord length keeps euclidean and graph scales comparable.
                let radius = 0.5 / libm::sin(core::f64::consts::PI / n as f64);
                b.add_vertex_at(m, &[radius * libm::cos(t), radius * libm::sin(t)])?;
            }
            for i in 0..n {
                b.add_edge(i, (i + 1) % n, c)?;
            }
            b.build()
        }
        Shape::Lattice { d, side } => lattice(d as usize, side, m, c, metric),
        Shape::SierpinskiGasket { level } => gasket(level, m, c, metric),
        Shape::VicsekTree { level } => vicsek(level, m, c, metric),
        Shape::SierpinskiCarpet { level } => carpet(level, m, c, metric),
    }
}

fn lattice(d: usize, side: usize, m: f64, c: f64, metric: MetricMode) -> Result<MetricMeasureGraph> {
    if d == 0 || side < 2 {
        return Err(Error::arg("lattice needs dimension >= 1 and side >= 2"));
    }
    let n = side.pow(d as u32);
    let mut b = GraphBuilder::with_capacity(metric, n, d * n);
    let mut idx = vec![0usize; d];
    let mut coords = vec![0.0; d];
    for v in 0..n {
        let mut r = v;
        for k in 0..d {
            idx[k] = r % side;
            coords[k] = idx[k] as f64;
            r /= side;
        }
        b.add_vertex_at(m, &coords)?;
    }
    for v in 0..n {
        let mut stride = 1;
        let mut r = v;
        for _ in 0..d {
            if r % side + 1 < side {
                b.add_edge(v, v + stride, c)?;
            }
            r /= side;
            stride *= side;
        }
    }
    b.build()
}

fn gasket(level: u32, m: f64, c: f64, metric: MetricMode) -> Result<MetricMeasureGraph> {
    let n = 1i64 << level;
    let mut triangles = vec![(0i64, 0i64)];
    let mut size = n;
    while size > 1 {
        let h = size / 2;
        triangles = triangles
            .iter()
            .flat_map(|&(a, b)| [(a, b), (a + h, b), (a, b + h)])
            .collect();
        size = h;
    }
    let corners = [(0, 0), (n, 0), (0, n)];
    let mut points: Vec<(i64, i64)> = Vec::with_capacity(3 * triangles.len());
    for &(a, b) in &triangles {
        points.extend([(a, b), (a + 1, b), (a, b + 1)]);
    }
    points.sort_unstable_by_key(|&(a, b)| (b, a));
    points.dedup();
    points.retain(|p| !corners.contains(p));
    let order: Vec<(i64, i64)> = corners.iter().copied().chain(points).collect();
    let ids: BTreeMap<(i64, i64), usize> = order.iter().enumerate().map(|(i, &p)| (p, i)).collect();

    let h = 1.0 / n as f64;
    let mut builder = GraphBuilder::with_capacity(metric, order.len(), 3 * triangles.len());
    for &(a, b) in &order {
        let x = (a as f64 + 0.5 * b as f64) * h;
        let y = b as f64 * (0.5 * math::sqrt(3.0)) * h;
        builder.add_vertex_at(m, &[x, y])?;
    }
    for &(a, b) in &triangles {
        let p = ids[&(a, b)];
        let q = ids[&(a + 1, b)];
        let r = ids[&(a, b + 1)];
        for (u, v) in [(p, q), (p, r), (q, r)] {
            builder.add_edge_with_length(u, v, c, h)?;
        }
    }
    builder.build()
}

fn vicsek(level: u32, m: f64, c: f64, metric: MetricMode) -> Result<MetricMeasureGraph> {
    let mut centers = vec![(0i64, 0i64)];
    for k in 0..level {
        let s = 2 * 3i64.pow(k);
        centers = centers
            .iter()
            .flat_map(|&(x, y)| [(x, y), (x - s, y - s), (x + s, y - s), (x - s, y + s), (x + s, y + s)])
            .collect();
    }
    let arms = [(-1, -1), (1, -1), (-1, 1), (1, 1)];
    let mut points: Vec<(i64, i64)> = Vec::with_capacity(5 * centers.len());
    for &(x, y) in &centers {
        points.push((x, y));
        points.extend(arms.iter().map(|&(dx, dy)| (x + dx, y + dy)));
    }
    points.sort_unstable_by_key(|&(x, y)| (y, x));
    points.dedup();
    points.retain(|&p| p != (0, 0));
    let order: Vec<(i64, i64)> = core::iter::once((0, 0)).chain(points).collect();
    let ids: BTreeMap<(i64, i64), usize> = order.iter().enumerate().map(|(i, &p)| (p, i)).collect();

    let mut b = GraphBuilder::with_capacity(metric, order.len(), 4 * centers.len());
    for &(x, y) in &order {
        b.add_vertex_at(m, &[x as f64, y as f64])?;
    }
    for &(x, y) in &centers {
        let u = ids[&(x, y)];
        for &(dx, dy) in &arms {
            let v = ids[&(x + dx, y + dy)];
            if metric == MetricMode::Graph {
                b.add_edge_with_length(u, v, c, 1.0)?;
            } else {
                b.add_edge(u, v, c)?;
            }
        }
    }
    b.build()
}

fn in_carpet(mut i: usize, mut j: usize) -> bool {
    while i > 0 || j > 0 {
        if i % 3 == 1 && j % 3 == 1 {
            return false;
        }
        i /= 3;
        j /= 3;
    }
    true
}

fn carpet(level: u32, m: f64, c: f64, metric: MetricMode) -> Result<MetricMeasureGraph> {
    let side = 3usize.pow(level);
    let mut ids = vec![usize::MAX; side * side];
    let mut b = GraphBuilder::with_capacity(metric, 8usize.pow(level), 2 * 8usize.pow(level));
    for j in 0..side {
        for i in 0..side {
            if in_carpet(i, j) {
                ids[j * side + i] = b.add_vertex_at(m, &[i as f64, j as f64])?;
            }
        }
    }
    for j in 0..side {
        for i in 0..side {
            let u = ids[j * side + i];
            if u == usize::MAX {
                continue;
            }
            if i + 1 < side && ids[j * side + i + 1] != usize::MAX {
                b.add_edge(u, ids[j * side + i + 1], c)?;
            }
            if j + 1 < side && ids[(j + 1) * side + i] != usize::MAX {
                b.add_edge(u, ids[(j + 1) * side + i], c)?;
            }
        }
    }
    b.build()
}

/// Map from the vertices of `coarse` to the vertices of `fine` at the same
/// coordinates, within `tol` in every coordinate.
pub fn refinement_map(coarse: &MetricMeasureGraph, fine: &MetricMeasureGraph, tol: f64) -> Result<Vec<VertexId>> {
    if !coarse.has_coords() || coarse.dim() != fine.dim() {
        return Err(Error::arg("refinement by coordinates needs matching coordinate dimensions"));
    }
    let key = |p: &[f64]| -> Vec<i64> { p.iter().map(|&x| math::round(x / tol) as i64).collect() };
    let mut index: BTreeMap<Vec<i64>, Vec<VertexId>> = BTreeMap::new();
    for v in 0..fine.len() {
        index.entry(key(fine.coords(v).unwrap())).or_default().push(v);
    }
    let dim = coarse.dim();
    let mut out = Vec::with_capacity(coarse.len());
    for v in 0..coarse.len() {
        let p = coarse.coords(v).unwrap();
        let base = key(p);
        let mut found = None;
        'search: for code in 0..3usize.pow(dim as u32) {
            let mut k = base.clone();
            let mut r = code;
            for x in k.iter_mut() {
                *x += (r % 3) as i64 - 1;
                r /= 3;
            }
            if let Some(cands) = index.get(&k) {
                for &w in cands {
                    let q = fine.coords(w).unwrap();
                    if p.iter().zip(q).all(|(a, b)| math::abs(a - b) <= tol) {
                        found = Some(w);
                        break 'search;
                    }
                }
            }
        }
        out.push(found.ok_or_else(|| Error::arg(format!("coarse vertex {v} has no fine counterpart")))?);
    }
    Ok(out)
}

/// Disjoint union of `a` and `b` with `va` and `vb` identified.
///
/// `a` keeps its ids; the vertices of `b` other than `vb` follow in order.
/// The glued vertex carries the sum of both measures. The result uses the
/// graph metric with the original edge lengths; coordinates are dropped.
pub fn glue_at_point(a: &MetricMeasureGraph, b: &MetricMeasureGraph, va: VertexId, vb: VertexId) -> Result<MetricMeasureGraph> {
    a.check_vertex(va)?;
    b.check_vertex(vb)?;
    let mut builder = GraphBuilder::with_capacity(MetricMode::Graph, a.len() + b.len() - 1, a.edge_count() + b.edge_count())
        .allow_parallel_edges(a.has_parallel_edges() || b.has_parallel_edges());
    for v in 0..a.len() {
        let extra = if v == va { b.measure(vb) } else { 0.0 };
        builder.add_vertex(a.measure(v) + extra)?;
    }
    let mut map = vec![va; b.len()];
    for (v, slot) in map.iter_mut().enumerate() {
        if v != vb {
            *slot = builder.add_vertex(b.measure(v))?;
        }
    }
    for e in a.edges() {
        builder.add_edge_with_length(e.u, e.v, e.conductance, e.length)?;
    }
    for e in b.edges() {
        builder.add_edge_with_length(map[e.u], map[e.v], e.conductance, e.length)?;
    }
    builder.build()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum WeightForm {
    /// `(1 + d(o,v))^α`
    Power,
    /// `(1 + d(o,v)²)^(α/2)`
    Bracket,
}

/// A radial weight about a base point.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WeightSpec {
    pub origin: VertexId,
    pub alpha: f64,
    pub form: WeightForm,
}

impl WeightSpec {
    pub fn eval_at_distance(&self, d: f64) -> f64 {
        if self.alpha == 0.0 {
            return 1.0;
        }
        match self.form {
            WeightForm::Power => math::powf(1.0 + d, self.alpha),
            WeightForm::Bracket => math::powf(1.0 + d * d, 0.5 * self.alpha),
        }
    }

    /// Weight of every vertex.
    pub fn values(&self, space: &MetricMeasureGraph) -> Result<Vec<f64>> {
        space.check_vertex(self.origin)?;
        if !self.alpha.is_finite() {
            return Err(Error::arg("weight exponent must be finite"));
        }
        let w: Vec<f64> = space.distances_from(self.origin).iter().map(|&d| self.eval_at_distance(d)).collect();
        if let Some(v) = w.iter().position(|x| !(x.is_finite() && *x > 0.0)) {
            return Err(Error::arg(format!("weight at vertex {v} is not positive and finite")));
        }
        Ok(w)
    }
}

/// `m'(v) = w(v) m(v)` and `c'(uv) = c(uv) (w(u) + w(v)) / 2`.
pub fn apply_weight(space: &MetricMeasureGraph, w: &WeightSpec) -> Result<MetricMeasureGraph> {
    apply_weight_values(space, &w.values(space)?)
}

pub fn apply_weight_values(space: &MetricMeasureGraph, w: &[f64]) -> Result<MetricMeasureGraph> {
    if w.len() != space.len() {
        return Err(Error::arg("weight vector length does not match the graph"));
    }
    if let Some(v) = w.iter().position(|x| !(x.is_finite() && *x > 0.0)) {
        return Err(Error::arg(format!("weight at vertex {v} is not positive and finite")));
    }
    let measure = space.measures().iter().zip(w).map(|(m, w)| m * w).collect();
    let cond: Vec<f64> = space
        .edges()
        .iter()
        .map(|e| e.conductance * (w[e.u] + w[e.v]) / 2.0)
        .collect();
    space.reweighted(measure, &cond)
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AdmissibilityReport {
    pub alpha1: f64,
    pub alpha2: f64,
    #[cfg_attr(feature = "serde", serde(with = "crate::serde_f64"))]
    pub c: f64,
    pub cap: f64,
    pub pass: bool,
    /// Pair `(x, y)`, `d(o,x) ≤ d(o,y)`, attaining `c`.
    pub witness: Option<(VertexId, VertexId)>,
    pub pairs_used: usize,
    pub warnings: Vec<String>,
}

/// Fits the two-sided power bound between weight ratios and distance ratios.
///
/// With `declared` set, both exponents are fixed to it and only the constant
/// is fitted. Otherwise one exponent `α₁ = α₂` is chosen to minimise the
/// constant; with separate free exponents every finite sample fits at
/// constant 1, so that fit says nothing.
pub fn weight_admissibility_check(
    space: &MetricMeasureGraph,
    origin: VertexId,
    weights: &[f64],
    declared: Option<f64>,
    pairs: &[(VertexId, VertexId)],
    cap: f64,
) -> Result<AdmissibilityReport> {
    space.check_vertex(origin)?;
    if weights.len() != space.len() {
        return Err(Error::arg("weight vector length does not match the graph"));
    }
    let dist = space.distances_from(origin);
    let mut warnings = Vec::new();
    // (log t, log ratio, x, y) with t = d(o,x)/d(o,y) ≤ 1.
    let mut samples: Vec<(f64, f64, VertexId, VertexId)> = Vec::with_capacity(pairs.len());
    let mut skipped = 0usize;
    for &(p, q) in pairs {
        space.check_vertex(p)?;
        space.check_vertex(q)?;
        let (x, y) = if dist[p] <= dist[q] { (p, q) } else { (q, p) };
        if !(dist[x] > 0.0) || !dist[y].is_finite() {
            skipped += 1;
            continue;
        }
        samples.push((math::ln(dist[x] / dist[y]), math::ln(weights[x] / weights[y]), x, y));
    }
    if skipped > 0 {
        warnings.push(format!("{skipped} pairs at the base point or unreachable were skipped"));
    }
    if samples.len() < 10 {
        return Err(Error::arg(format!("need at least 10 usable pairs, got {}", samples.len())));
    }
    let deviation = |alpha: f64| -> (f64, usize) {
        let mut worst = (0.0f64, 0usize);
        for (i, &(lt, lr, _, _)) in samples.iter().enumerate() {
            let dev = math::abs(lr - alpha * lt);
            if dev > worst.0 {
                worst = (dev, i);
            }
        }
        worst
    };
    let alpha = match declared {
        Some(a) => a,
        None => {
            let slopes = samples.iter().filter(|s| s.0 < 0.0).map(|s| s.1 / s.0);
            let (mut lo, mut hi) = slopes.fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), s| (l.min(s), h.max(s)));
            if !lo.is_finite() {
                lo = 0.0;
                hi = 0.0;
            }
            // The deviation is convex in alpha.
            let phi = 0.5 * (math::sqrt(5.0) - 1.0);
            for _ in 0..200 {
                let a = hi - phi * (hi - lo);
                let b = lo + phi * (hi - lo);
                if deviation(a).0 <= deviation(b).0 {
                    hi = b;
                } else {
                    lo = a;
                }
            }
            0.5 * (lo + hi)
        }
    };
    let (dev, idx) = deviation(alpha);
    let c = math::exp(dev);
    let pass = c <= cap;
    Ok(AdmissibilityReport {
        alpha1: alpha,
        alpha2: alpha,
        c,
        cap,
        pass,
        witness: Some((samples[idx].2, samples[idx].3)),
        pairs_used: samples.len(),
        warnings,
    })
}

/// Every unordered pair of distinct vertices.
pub fn all_pairs(len: usize) -> Vec<(VertexId, VertexId)> {
    let mut out = Vec::with_capacity(len * len.saturating_sub(1) / 2);
    for y in 0..len {
        for x in 0..y {
            out.push((x, y));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::union_find::UnionFind;

    #[test]
    fn closed_form_counts() {
        for spec in [
            GeneratorSpec::path(5),
            GeneratorSpec::cycle(7),
            GeneratorSpec::lattice(2, 6),
            GeneratorSpec::lattice(3, 4),
            GeneratorSpec::sierpinski_gasket(0),
            GeneratorSpec::sierpinski_gasket(1),
            GeneratorSpec::sierpinski_gasket(4),
            GeneratorSpec::vicsek_tree(0),
            GeneratorSpec::vicsek_tree(3),
            GeneratorSpec::sierpinski_carpet(1),
            GeneratorSpec::sierpinski_carpet(3),
        ] {
            let g = generate(&spec).unwrap();
            let (v, e) = spec.counts().unwrap();
            assert_eq!((g.len() as u64, g.edge_count() as u64), (v, e), "{spec:?}");
            assert!(g.is_connected(), "{spec:?}");
        }
    }

    #[test]
    fn gasket_level_one() {
        let g = generate(&GeneratorSpec::sierpinski_gasket(1)).unwrap();
        assert_eq!((g.len(), g.edge_count()), (6, 9));
        assert_eq!(g.coords(1).unwrap(), &[1.0, 0.0]);
        assert_eq!(g.min_edge_length(), 0.5);
    }

    #[test]
    fn resource_limit_names_the_limit() {
        let err = generate(&GeneratorSpec::lattice(3, 1000)).unwrap_err();
        assert!(matches!(err, Error::ResourceLimit { limit: "max_vertices", requested: 1_000_000_000, .. }));
    }

    #[test]
    fn gluing_two_paths_makes_a_path() {
        let p = generate(&GeneratorSpec::path(3)).unwrap();
        let g = glue_at_point(&p, &p, 0, 0).unwrap();
        assert_eq!((g.len(), g.edge_count()), (7, 6));
        assert_eq!(g.measure(0), 2.0);
        let d = g.distances_from(0);
        let mut sorted = d.clone();
        sorted.sort_by(f64::total_cmp);
        assert_eq!(sorted, vec![0.0, 1.0, 1.0, 2.0, 2.0, 3.0, 3.0]);
        assert!((0..7).all(|v| g.degree(v) <= 2));
    }

    #[test]
    fn glued_hub_is_a_cut_vertex() {
        let t = generate(&GeneratorSpec::vicsek_tree(3)).unwrap();
        let g = glue_at_point(&t, &t, 0, 0).unwrap();
        assert_eq!(g.len(), 2 * t.len() - 1);
        assert_eq!(g.edge_count(), 2 * t.edge_count());
        let mut uf = UnionFind::new(g.len());
        for e in g.edges() {
            if e.u != 0 && e.v != 0 {
                uf.union(e.u, e.v);
            }
        }
        // Vertex 0 stays a singleton; the rest splits into the arms of both copies.
        assert!(uf.set_count() > 2);
    }

    #[test]
    fn weight_hand_values() {
        let p = generate(&GeneratorSpec::path(2)).unwrap();
        let w = WeightSpec { origin: 0, alpha: 1.0, form: WeightForm::Power };
        let g = apply_weight(&p, &w).unwrap();
        assert_eq!(g.measures(), &[1.0, 2.0, 3.0]);
        assert_eq!(g.edges()[0].conductance, 1.5);
        assert_eq!(g.edges()[1].conductance, 2.5);
    }

    #[test]
    fn zero_exponent_is_identity() {
        let p = generate(&GeneratorSpec::sierpinski_gasket(2)).unwrap();
        let w = WeightSpec { origin: 4, alpha: 0.0, form: WeightForm::Bracket };
        let g = apply_weight(&p, &w).unwrap();
        assert_eq!(g.measures(), p.measures());
        assert_eq!(g.edges(), p.edges());
    }

    #[test]
    fn gasket_refinement_preserves_distances() {
        let coarse = generate(&GeneratorSpec::sierpinski_gasket(2)).unwrap();
        let fine = generate(&GeneratorSpec::sierpinski_gasket(3)).unwrap();
        let map = refinement_map(&coarse, &fine, 1e-9).unwrap();
        assert_eq!(&map[..3], &[0, 1, 2]);
        for x in 0..coarse.len() {
            let dc = coarse.distances_from(x);
            let df = fine.distances_from(map[x]);
            for y in 0..coarse.len() {
                assert!((dc[y] - df[map[y]]).abs() < 1e-12);
            }
        }
    }
}
