use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use crate::exec::Executor;
use crate::space::{euclidean, MetricMeasureGraph, MetricMode, Neighborhood, VertexId};
use crate::union_find::UnionFind;

const CHUNK: usize = 256;

/// Graph on a vertex subset joining points at distance at most `ε`.
///
/// Vertices are addressed by local index, the position in the sorted subset.
#[derive(Debug, Clone)]
pub struct ProximityGraph {
    vertices: Vec<VertexId>,
    offsets: Vec<usize>,
    adjacency: Vec<usize>,
}

impl ProximityGraph {
    /// `vertices` must be sorted and free of duplicates.
    pub fn build<E: Executor>(space: &MetricMeasureGraph, vertices: &[VertexId], epsilon: f64, exec: &E) -> Self {
        debug_assert!(vertices.windows(2).all(|w| w[0] < w[1]));
        let rows = match space.metric() {
            MetricMode::Graph => graph_rows(space, vertices, epsilon, exec),
            MetricMode::Euclid => euclid_rows(space, vertices, epsilon),
        };
        let mut offsets = Vec::with_capacity(vertices.len() + 1);
        offsets.push(0);
        let mut adjacency = Vec::new();
        for row in rows {
            adjacency.extend_from_slice(&row);
            offsets.push(adjacency.len());
        }
        Self {
            vertices: vertices.to_vec(),
            offsets,
            adjacency,
        }
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertex(&self, i: usize) -> VertexId {
        self.vertices[i]
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    pub fn local(&self, v: VertexId) -> Option<usize> {
        self.vertices.binary_search(&v).ok()
    }

    /// Local neighbours of `i`, ascending.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adjacency[self.offsets[i]..self.offsets[i + 1]]
    }

    /// Component label per local index, labels numbered by first appearance.
    pub fn components(&self) -> Vec<usize> {
        let mut uf = UnionFind::new(self.len());
        for i in 0..self.len() {
            for &j in self.neighbors(i) {
                if j > i {
                    uf.union(i, j);
                }
            }
        }
        uf.labels()
    }

    /// Fewest-hop path between local indices, visiting neighbours in
    /// ascending order; `allowed` restricts the intermediate and end points.
    pub fn shortest_path(&self, from: usize, to: usize, allowed: Option<&[bool]>) -> Option<Vec<usize>> {
        let ok = |i: usize| allowed.is_none_or(|m| m[i]);
        if !ok(from) || !ok(to) {
            return None;
        }
        let mut parent = vec![usize::MAX; self.len()];
        parent[from] = from;
        let mut queue = VecDeque::from([from]);
        while let Some(i) = queue.pop_front() {
            if i == to {
                break;
            }
            for &j in self.neighbors(i) {
                if parent[j] == usize::MAX && ok(j) {
                    parent[j] = i;
                    queue.push_back(j);
                }
            }
        }
        if parent[to] == usize::MAX {
            return None;
        }
        let mut path = vec![to];
        let mut cur = to;
        while cur != from {
            cur = parent[cur];
            path.push(cur);
        }
        path.reverse();
        Some(path)
    }
}

fn graph_rows<E: Executor>(space: &MetricMeasureGraph, vertices: &[VertexId], epsilon: f64, exec: &E) -> Vec<Vec<usize>> {
    let chunks: Vec<&[VertexId]> = vertices.chunks(CHUNK).collect();
    let parts = exec.map(&chunks, |chunk| {
        let mut search = Neighborhood::new(space);
        let mut near = Vec::new();
        let mut rows = Vec::with_capacity(chunk.len());
        for &v in chunk.iter() {
            search.within(v, epsilon, &mut near);
            rows.push(
                near.iter()
                    .filter(|&&(u, _)| u != v)
                    .filter_map(|&(u, _)| vertices.binary_search(&u).ok())
                    .collect::<Vec<_>>(),
            );
        }
        rows
    });
    parts.into_iter().flatten().collect()
}

/// Sweep over the subset sorted by first coordinate.
fn euclid_rows(space: &MetricMeasureGraph, vertices: &[VertexId], epsilon: f64) -> Vec<Vec<usize>> {
    let point = |i: usize| space.coords(vertices[i]).unwrap();
    let mut order: Vec<usize> = (0..vertices.len()).collect();
    order.sort_by(|&a, &b| point(a)[0].total_cmp(&point(b)[0]));
    let mut rows = vec![Vec::new(); vertices.len()];
    for (k, &i) in order.iter().enumerate() {
        let p = point(i);
        for &j in &order[k + 1..] {
            let q = point(j);
            if q[0] - p[0] > epsilon {
                break;
            }
            if euclidean(p, q) <= epsilon {
                rows[i].push(j);
                rows[j].push(i);
            }
        }
    }
    for row in &mut rows {
        row.sort_unstable();
    }
    rows
}

/// Breadth-first ε-chain search generating proximity neighbours on demand.
pub(crate) struct ChainSearch<'a> {
    near: Neighborhood<'a>,
    buf: Vec<(VertexId, f64)>,
    parent: Vec<VertexId>,
    touched: Vec<VertexId>,
}

impl<'a> ChainSearch<'a> {
    pub(crate) fn new(space: &'a MetricMeasureGraph) -> Self {
        Self {
            near: Neighborhood::new(space),
            buf: Vec::new(),
            parent: vec![usize::MAX; space.len()],
            touched: Vec::new(),
        }
    }

    /// Fewest-step ε-chain from `x` to `y` through vertices accepted by
    /// `inside`, neighbours visited in ascending id order.
    pub(crate) fn shortest(&mut self, x: VertexId, y: VertexId, epsilon: f64, inside: impl Fn(VertexId) -> bool) -> Option<Vec<VertexId>> {
        if !inside(x) || !inside(y) {
            return None;
        }
        self.parent[x] = x;
        self.touched.push(x);
        let mut queue = VecDeque::from([x]);
        let mut found = x == y;
        while let Some(v) = queue.pop_front() {
            if found {
                break;
            }
            self.near.within(v, epsilon, &mut self.buf);
            for &(u, _) in &self.buf {
                if self.parent[u] == usize::MAX && inside(u) {
                    self.parent[u] = v;
                    self.touched.push(u);
                    if u == y {
                        found = true;
                        break;
                    }
                    queue.push_back(u);
                }
            }
        }
        let out = found.then(|| {
            let mut path = vec![y];
            let mut cur = y;
            while cur != x {
                cur = self.parent[cur];
                path.push(cur);
            }
            path.reverse();
            path
        });
        for &v in &self.touched {
            self.parent[v] = usize::MAX;
        }
        self.touched.clear();
        out
    }
}
