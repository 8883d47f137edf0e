use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::dirichlet::{floating_components, Dirichlet};
use crate::error::{Error, Result};
use crate::linalg::{SolverConfig, SolverMethod};
use crate::space::{MetricMeasureGraph, VertexId};

/// Minimal energy among functions equal to 1 on `A` and 0 on `B`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CapacityResult {
    pub value: f64,
    /// Equilibrium potential on every vertex. Vertices cut off from both
    /// sets carry 0.
    pub potential: Vec<f64>,
    pub residual: f64,
    pub method: SolverMethod,
    pub iterations: usize,
    pub tolerance: f64,
}

/// `Cap(A, B)` by harmonic extension of the indicator of `A`.
pub fn capacity(space: &MetricMeasureGraph, a: &[VertexId], b: &[VertexId], config: &SolverConfig) -> Result<CapacityResult> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::arg("capacity needs nonempty sets"));
    }
    let n = space.len();
    // 0 free, 1 in A, 2 in B
    let mut role = vec![0u8; n];
    for &v in a {
        space.check_vertex(v)?;
        role[v] = 1;
    }
    for &v in b {
        space.check_vertex(v)?;
        if role[v] == 1 {
            return Err(Error::arg(format!("sets intersect at vertex {v}")));
        }
        role[v] = 2;
    }
    let mut interior: Vec<VertexId> = (0..n).filter(|&v| role[v] == 0).collect();
    let floating = floating_components(space, &interior);
    if !floating.is_empty() {
        let mut drop = vec![false; n];
        for v in floating.iter().flatten() {
            drop[*v] = true;
        }
        interior.retain(|&v| !drop[v]);
    }
    let problem = Dirichlet::new(space, &interior, config)?;
    let sol = problem.solve_with(|u| if role[u] == 1 { 1.0 } else { 0.0 })?;
    let mut potential: Vec<f64> = role.iter().map(|&r| if r == 1 { 1.0 } else { 0.0 }).collect();
    for (i, &v) in interior.iter().enumerate() {
        potential[v] = sol.x[i];
    }
    let value = space.energy(&potential);
    Ok(CapacityResult {
        value,
        potential,
        residual: sol.residual,
        method: sol.method,
        iterations: sol.iterations,
        tolerance: problem.tolerance(),
    })
}

/// Vertices at distance at most `r` and at least `big_r` from `x`.
pub(crate) fn ball_sets(space: &MetricMeasureGraph, dist: &[f64], r: f64, big_r: f64) -> (Vec<VertexId>, Vec<VertexId>) {
    let inner = (0..space.len()).filter(|&v| dist[v] <= r).collect();
    let outer = (0..space.len()).filter(|&v| dist[v] >= big_r).collect();
    (inner, outer)
}

/// `Cap(B(x,r), B(x,R)ᶜ)` where the inner ball is taken closed, i.e. the
/// potential is 1 on `{d ≤ r}` and 0 on `{d ≥ R}`.
///
/// Errors when the exterior is empty.
pub fn ball_capacity(space: &MetricMeasureGraph, x: VertexId, r: f64, big_r: f64, config: &SolverConfig) -> Result<CapacityResult> {
    space.check_vertex(x)?;
    if !(r > 0.0 && big_r > r) {
        return Err(Error::arg(format!("need 0 < r < R, got r = {r}, R = {big_r}")));
    }
    let dist = space.distances_from(x);
    ball_capacity_with(space, &dist, r, big_r, config)
}

pub(crate) fn ball_capacity_with(space: &MetricMeasureGraph, dist: &[f64], r: f64, big_r: f64, config: &SolverConfig) -> Result<CapacityResult> {
    let (inner, outer) = ball_sets(space, dist, r, big_r);
    if outer.is_empty() {
        return Err(Error::arg(format!("ball of radius {big_r} covers the whole space")));
    }
    capacity(space, &inner, &outer, config)
}
