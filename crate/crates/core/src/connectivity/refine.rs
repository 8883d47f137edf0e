use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::proximity::ChainSearch;
use crate::error::{Error, Result};
use crate::space::{MetricMeasureGraph, Neighborhood, VertexId};

/// Upper bound on the number of parameter cells of the finest level.
pub const MAX_CELLS: u64 = 5_000_000;

/// Multi-scale chains converging to a curve.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RefinedChain {
    pub x: VertexId,
    pub y: VertexId,
    /// `d(x,y)` on the first level.
    pub distance: f64,
    pub epsilon_ratio: f64,
    pub a0: f64,
    /// `ε_k = ε^k d(x,y)`.
    pub schedule: Vec<f64>,
    /// `γ_k` on level `k`, one vertex per parameter cell: cell `j` of `γ_k`
    /// covers `[j/M_k, (j+1)/M_k)` with `M_k = Π_{i≤k} (N_i + 1)`; the last
    /// cell holds `y`.
    pub chains: Vec<Vec<VertexId>>,
    /// Longest hop chain `N_k` used to subdivide each cell.
    pub hops: Vec<usize>,
    /// `sup_t d(γ_k(t), γ_{k+1}(t))` on level `k+1`.
    pub cauchy: Vec<f64>,
    /// `A₀ ε^k d(x,y)`.
    pub cauchy_bounds: Vec<f64>,
    /// `sup_{k,t} d(x, γ_k(t))`.
    pub containment: f64,
    /// `2 A₀ d(x,y)`.
    pub containment_bound: f64,
    /// Both bounds hold strictly at every grid point.
    pub holds: bool,
}

fn refinement_error(level: usize, hop: usize, reason: impl Into<String>) -> Error {
    Error::Refinement {
        level,
        hop,
        reason: reason.into(),
    }
}

/// Builds `γ_1, γ_2, …` with `γ_k` on `levels[k-1]`.
///
/// `maps[k]` sends the vertices of `levels[k]` into `levels[k+1]` and must
/// preserve the distances between consecutive chain points within a factor
/// `1 ± tol`. `γ_1` is a shortest `ε d(x,y)`-chain in `B(x, A₀ d(x,y))`. Each
/// cell of `γ_k` holding `z` followed by a cell holding `w` is split into
/// `N_{k+1} + 1` cells carrying a shortest `ε^{k+1} d(x,y)`-chain from `z` to
/// `w` in `B(z, A₀ d(z,w))`, padded with `w`; the last cell stays constant.
pub fn refine_chain(
    levels: &[MetricMeasureGraph],
    maps: &[Vec<VertexId>],
    x: VertexId,
    y: VertexId,
    epsilon_ratio: f64,
    a0: f64,
    tol: f64,
) -> Result<RefinedChain> {
    if levels.is_empty() || maps.len() + 1 != levels.len() {
        return Err(Error::arg("need one refinement map between each pair of consecutive levels"));
    }
    if !(epsilon_ratio > 0.0 && epsilon_ratio < 0.5) {
        return Err(Error::arg(format!("epsilon ratio must lie in (0, 1/2), got {epsilon_ratio}")));
    }
    if !(a0 >= 1.0) || !(tol >= 0.0) {
        return Err(Error::arg("need A0 >= 1 and a nonnegative tolerance"));
    }
    for (k, map) in maps.iter().enumerate() {
        if map.len() != levels[k].len() {
            return Err(Error::arg(format!("map {k} covers {} of {} vertices", map.len(), levels[k].len())));
        }
        if let Some(&v) = map.iter().find(|&&v| v >= levels[k + 1].len()) {
            return Err(Error::arg(format!("map {k} sends a vertex to {v}, out of range")));
        }
    }
    let first = &levels[0];
    first.check_vertex(x)?;
    first.check_vertex(y)?;
    let distance = first.distance(x, y);
    if !distance.is_finite() {
        return Err(refinement_error(1, 0, "endpoints are not connected"));
    }
    let containment_bound = 2.0 * a0 * distance;

    let mut schedule = Vec::with_capacity(levels.len());
    let mut chains: Vec<Vec<VertexId>> = Vec::with_capacity(levels.len());
    let mut hops = Vec::with_capacity(levels.len());
    let mut cauchy = Vec::new();
    let mut cauchy_bounds = Vec::new();
    let mut containment: f64 = 0.0;
    let mut holds = true;

    // Level 1.
    let scale = epsilon_ratio * distance;
    schedule.push(scale);
    let chain = if x == y {
        vec![x]
    } else {
        let mut near = Vec::new();
        Neighborhood::new(first).within(x, a0 * distance, &mut near);
        let mut inside = vec![false; first.len()];
        for &(v, d) in &near {
            inside[v] = d < a0 * distance;
        }
        ChainSearch::new(first)
            .shortest(x, y, scale, |v| inside[v])
            .ok_or_else(|| refinement_error(1, 0, format!("no {scale}-chain in the ball of radius {}", a0 * distance)))?
    };
    hops.push(chain.len() - 1);
    let cells = chain;
    containment = containment.max(max_distance(first, x, &cells));
    holds &= containment < containment_bound || distance == 0.0;
    chains.push(cells);

    let mut origin = x;
    for k in 1..levels.len() {
        let level = k + 1;
        let fine = &levels[k];
        let map = &maps[k - 1];
        let coarse = &levels[k - 1];
        origin = map[origin];
        let scale = schedule[k - 1] * epsilon_ratio;
        schedule.push(scale);
        let prev = &chains[k - 1];

        let mut near = Neighborhood::new(fine);
        let mut coarse_near = Neighborhood::new(coarse);
        let mut search = ChainSearch::new(fine);
        let mut inside = vec![false; fine.len()];
        let mut ball = Vec::new();
        // Hop chain with the distance from its start to each point.
        let mut memo: BTreeMap<(VertexId, VertexId), Vec<(VertexId, f64)>> = BTreeMap::new();
        for (i, pair) in prev.windows(2).enumerate() {
            let (z, w) = (map[pair[0]], map[pair[1]]);
            if pair[0] == pair[1] {
                continue;
            }
            let hop = near.distance(z, w);
            let coarse_hop = coarse_near.distance(pair[0], pair[1]);
            if (hop - coarse_hop).abs() > tol * coarse_hop {
                return Err(refinement_error(level, i, format!("map distorts a hop of length {coarse_hop} to {hop}")));
            }
            if memo.contains_key(&(z, w)) {
                continue;
            }
            let radius = a0 * hop;
            near.within(z, radius, &mut ball);
            for &(v, d) in &ball {
                inside[v] = d < radius;
            }
            let found = search.shortest(z, w, scale, |v| inside[v]);
            for &(v, _) in &ball {
                inside[v] = false;
            }
            let path = found.ok_or_else(|| refinement_error(level, i, format!("no {scale}-chain of a hop of length {hop}")))?;
            let from_z: Vec<(VertexId, f64)> = path
                .iter()
                .map(|&v| (v, ball.binary_search_by_key(&v, |p| p.0).map_or(f64::INFINITY, |j| ball[j].1)))
                .collect();
            memo.insert((z, w), from_z);
        }
        let n = memo.values().map(|c| c.len() - 1).max().unwrap_or(0);
        let total = (prev.len() as u64).saturating_mul(n as u64 + 1);
        if total > MAX_CELLS {
            return Err(Error::ResourceLimit {
                limit: "refinement cells",
                requested: total,
                allowed: MAX_CELLS,
            });
        }
        let mut cells = Vec::with_capacity(total as usize);
        let mut sup: f64 = 0.0;
        for i in 0..prev.len() {
            let z = map[prev[i]];
            match prev.get(i + 1).map(|&w| map[w]) {
                Some(w) if w != z => {
                    let chain = &memo[&(z, w)];
                    for j in 0..=n {
                        let (v, d) = chain[j.min(chain.len() - 1)];
                        cells.push(v);
                        sup = sup.max(d);
                    }
                }
                _ => cells.extend(core::iter::repeat_n(z, n + 1)),
            }
        }
        let bound = a0 * schedule[k - 1];
        holds &= sup < bound || distance == 0.0;
        cauchy.push(sup);
        cauchy_bounds.push(bound);
        containment = containment.max(max_distance(fine, origin, &cells));
        holds &= containment < containment_bound || distance == 0.0;
        hops.push(n);
        chains.push(cells);
    }
    Ok(RefinedChain {
        x,
        y,
        distance,
        epsilon_ratio,
        a0,
        schedule,
        chains,
        hops,
        cauchy,
        cauchy_bounds,
        containment,
        containment_bound,
        holds,
    })
}

fn max_distance(space: &MetricMeasureGraph, x: VertexId, points: &[VertexId]) -> f64 {
    let dist = space.distances_from(x);
    points.iter().map(|&v| dist[v]).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{generate, refinement_map, GeneratorSpec};

    fn gaskets(levels: &[u32]) -> (Vec<MetricMeasureGraph>, Vec<Vec<VertexId>>) {
        let spaces: Vec<_> = levels
            .iter()
            .map(|&l| generate(&GeneratorSpec::sierpinski_gasket(l)).unwrap())
            .collect();
        let maps = spaces.windows(2).map(|w| refinement_map(&w[0], &w[1], 1e-9).unwrap()).collect();
        (spaces, maps)
    }

    #[test]
    fn gasket_even_levels_refine() {
        let (spaces, maps) = gaskets(&[2, 4, 6]);
        let r = refine_chain(&spaces, &maps, 0, 1, 1.0 / 3.0, 2.0, 1e-9).unwrap();
        assert!(r.holds);
        assert_eq!(r.distance, 1.0);
        assert_eq!(r.chains.len(), 3);
        for (k, chain) in r.chains.iter().enumerate() {
            let space = &spaces[k];
            assert_eq!(chain[0], if k == 0 { 0 } else { maps[..k].iter().fold(0, |v, m| m[v]) });
            for w in chain.windows(2) {
                assert!(space.distance(w[0], w[1]) <= r.schedule[k] + 1e-12);
            }
        }
        let cells: usize = r.hops.iter().map(|n| n + 1).product::<usize>() / (r.hops[0] + 1) * r.chains[0].len();
        assert_eq!(r.chains[2].len(), cells);
    }

    #[test]
    fn gasket_odd_level_cannot_resolve_scale() {
        let (spaces, maps) = gaskets(&[2, 3]);
        let err = refine_chain(&spaces, &maps, 0, 1, 1.0 / 3.0, 2.0, 1e-9).unwrap_err();
        assert!(matches!(err, Error::Refinement { level: 2, .. }), "{err}");
    }

    #[test]
    fn repeated_path_hits_scale_floor() {
        let p = generate(&GeneratorSpec::path(10)).unwrap();
        let id: Vec<_> = (0..p.len()).collect();
        let levels = vec![p.clone(), p.clone(), p];
        let err = refine_chain(&levels, &[id.clone(), id], 0, 10, 0.3, 2.0, 0.0).unwrap_err();
        assert!(matches!(err, Error::Refinement { level: 2, .. }));
    }

    #[test]
    fn collapsing_map_is_a_distortion() {
        let (spaces, maps) = gaskets(&[2, 4]);
        let collapsed = vec![vec![0; maps[0].len()]];
        let err = refine_chain(&spaces, &collapsed, 0, 1, 1.0 / 3.0, 2.0, 1e-9).unwrap_err();
        assert!(matches!(err, Error::Refinement { level: 2, hop: 0, .. }), "{err}");
    }

    #[test]
    fn equal_endpoints_give_constant_chains() {
        let (spaces, maps) = gaskets(&[1, 2, 3]);
        let r = refine_chain(&spaces, &maps, 4, 4, 0.25, 2.0, 1e-9).unwrap();
        assert!(r.holds);
        for c in &r.chains {
            assert_eq!(c.len(), 1);
        }
    }
}
