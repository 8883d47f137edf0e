//! Seeded sampling of vertices and vertex pairs.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::space::{MetricMeasureGraph, VertexId};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// All unordered pairs of `region` when there are at most `limit` vertices,
/// otherwise `limit` pairs of distinct vertices drawn with `seed`.
pub fn region_pairs(region: &[VertexId], limit: usize, seed: u64) -> Vec<(VertexId, VertexId)> {
    if region.len() <= limit {
        let mut out = Vec::new();
        for (i, &y) in region.iter().enumerate() {
            for &x in &region[..i] {
                out.push((x, y));
            }
        }
        return out;
    }
    let mut r = rng(seed);
    (0..limit)
        .map(|_| {
            let i = r.random_range(0..region.len());
            let mut j = r.random_range(0..region.len() - 1);
            if j >= i {
                j += 1;
            }
            (region[i], region[j])
        })
        .collect()
}

/// Vertices whose distance to every vertex of less than maximal degree is at
/// least `margin`. On boxes these are the points at least `margin` from the
/// boundary.
pub fn interior_vertices(space: &MetricMeasureGraph, margin: f64) -> Vec<VertexId> {
    let max_degree = (0..space.len()).map(|v| space.degree(v)).max().unwrap_or(0);
    let boundary: Vec<VertexId> = (0..space.len()).filter(|&v| space.degree(v) < max_degree).collect();
    if boundary.is_empty() {
        return (0..space.len()).collect();
    }
    let dist = multi_source_distances(space, &boundary);
    (0..space.len()).filter(|&v| dist[v] >= margin).collect()
}

fn multi_source_distances(space: &MetricMeasureGraph, sources: &[VertexId]) -> Vec<f64> {
    use crate::space::HeapItem;
    use alloc::collections::BinaryHeap;
    let mut dist = alloc::vec![f64::INFINITY; space.len()];
    let mut heap = BinaryHeap::new();
    for &s in sources {
        dist[s] = 0.0;
        heap.push(HeapItem(0.0, s));
    }
    if space.metric() == crate::space::MetricMode::Euclid {
        for (v, slot) in dist.iter_mut().enumerate() {
            *slot = sources.iter().map(|&s| space.distance(s, v)).fold(f64::INFINITY, f64::min);
        }
        return dist;
    }
    while let Some(HeapItem(d, v)) = heap.pop() {
        if d > dist[v] {
            continue;
        }
        for (u, e) in space.neighbors(v) {
            let nd = d + e.length;
            if nd < dist[u] {
                dist[u] = nd;
                heap.push(HeapItem(nd, u));
            }
        }
    }
    dist
}

/// `count` interior vertices drawn without replacement, in draw order.
pub fn sample_interior(space: &MetricMeasureGraph, count: usize, margin: f64, seed: u64) -> Result<Vec<VertexId>> {
    let mut pool = interior_vertices(space, margin);
    if pool.len() < count {
        return Err(Error::arg(alloc::format!(
            "only {} vertices lie at distance {margin} from the boundary, {count} requested",
            pool.len()
        )));
    }
    let mut r = rng(seed);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let i = r.random_range(0..pool.len());
        out.push(pool.swap_remove(i));
    }
    Ok(out)
}

/// `count` pairs `(x, y)` with `x` drawn from `sources` and `y` uniform among
/// the vertices at distance exactly `d` from `x` (within `1e-9 d`).
pub fn pairs_at_distance(
    space: &MetricMeasureGraph,
    sources: &[VertexId],
    d: f64,
    count: usize,
    seed: u64,
) -> Result<Vec<(VertexId, VertexId)>> {
    if sources.is_empty() {
        return Err(Error::arg("no source vertices to sample from"));
    }
    let mut r = rng(seed);
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0usize;
    while out.len() < count {
        attempts += 1;
        if attempts > 20 * count + 100 {
            return Err(Error::arg(alloc::format!("could not find {count} pairs at distance {d}")));
        }
        let x = sources[r.random_range(0..sources.len())];
        let dist = space.distances_from(x);
        let ring: Vec<VertexId> = (0..space.len()).filter(|&v| (dist[v] - d).abs() <= 1e-9 * d).collect();
        if ring.is_empty() {
            continue;
        }
        out.push((x, ring[r.random_range(0..ring.len())]));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{generate, GeneratorSpec};

    #[test]
    fn small_regions_give_all_pairs() {
        assert_eq!(region_pairs(&[3, 5, 9], 200, 1), alloc::vec![(3, 5), (3, 9), (5, 9)]);
    }

    #[test]
    fn sampling_is_seeded() {
        let region: Vec<usize> = (0..500).collect();
        let a = region_pairs(&region, 200, 7);
        assert_eq!(a, region_pairs(&region, 200, 7));
        assert_ne!(a, region_pairs(&region, 200, 8));
        assert!(a.iter().all(|(x, y)| x != y));
    }

    #[test]
    fn interior_of_lattice_box() {
        let g = generate(&GeneratorSpec::lattice(2, 10)).unwrap();
        let inner = interior_vertices(&g, 3.0);
        assert_eq!(inner.len(), 16);
        assert!(inner.contains(&(3 + 3 * 10)));
        let pairs = pairs_at_distance(&g, &inner, 4.0, 10, 3).unwrap();
        assert!(pairs.iter().all(|&(x, y)| g.distance(x, y) == 4.0));
    }
}
