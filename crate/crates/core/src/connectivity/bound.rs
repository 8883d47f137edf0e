use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::proximity::ChainSearch;
use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::scaling::ScalingFunction;
use crate::space::{MetricMeasureGraph, Neighborhood, VertexId};

const CHUNK: usize = 8;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ChainBoundEntry {
    pub x: VertexId,
    pub y: VertexId,
    pub d: f64,
    pub epsilon: f64,
    /// `N_ε(x,y; B(x, A₀d))`, `None` when infinite.
    pub n: Option<usize>,
    /// `N²Ψ(ε)/Ψ(d)`.
    #[cfg_attr(feature = "serde", serde(with = "crate::serde_f64"))]
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ChainBoundReport {
    pub a0: f64,
    #[cfg_attr(feature = "serde", serde(with = "crate::serde_f64"))]
    pub supremum: f64,
    pub all_finite: bool,
    pub entries: Vec<ChainBoundEntry>,
}

/// Chain lengths against the scale-invariant bound `N² ≲ Ψ(d)/Ψ(ε)`.
///
/// Entries are ordered by pair, then by ε.
pub fn chain_bound_ratio<E: Executor>(
    space: &MetricMeasureGraph,
    pairs: &[(VertexId, VertexId)],
    epsilons: &[f64],
    a0: f64,
    psi: &ScalingFunction,
    exec: &E,
) -> Result<ChainBoundReport> {
    if !(a0 >= 1.0) || !a0.is_finite() {
        return Err(Error::arg(format!("A0 must be at least 1, got {a0}")));
    }
    for &eps in epsilons {
        super::check_epsilon(eps)?;
    }
    for &(x, y) in pairs {
        space.check_vertex(x)?;
        space.check_vertex(y)?;
    }
    let chunks: Vec<&[(VertexId, VertexId)]> = pairs.chunks(CHUNK).collect();
    let parts = exec.map(&chunks, |chunk| -> Result<Vec<ChainBoundEntry>> {
        let mut near = Neighborhood::new(space);
        let mut search = ChainSearch::new(space);
        let mut inside = vec![false; space.len()];
        let mut container = Vec::new();
        let mut out = Vec::with_capacity(chunk.len() * epsilons.len());
        for &(x, y) in chunk.iter() {
            let d = near.distance(x, y);
            if !d.is_finite() {
                return Err(Error::arg(format!("vertices {x} and {y} are not connected")));
            }
            near.within(x, a0 * d, &mut container);
            container.retain(|&(_, dv)| dv < a0 * d);
            for &(v, _) in &container {
                inside[v] = true;
            }
            for &eps in epsilons {
                if d < eps {
                    return Err(Error::arg(format!("pair ({x}, {y}) at distance {d} is closer than epsilon {eps}")));
                }
                let n = search.shortest(x, y, eps, |v| inside[v]).map(|c| c.len() - 1);
                let ratio = match n {
                    Some(n) => (n * n) as f64 * psi.eval(eps) / psi.eval(d),
                    None => f64::INFINITY,
                };
                out.push(ChainBoundEntry { x, y, d, epsilon: eps, n, ratio });
            }
            for &(v, _) in &container {
                inside[v] = false;
            }
        }
        Ok(out)
    });
    let mut entries = Vec::with_capacity(pairs.len() * epsilons.len());
    for part in parts {
        entries.extend(part?);
    }
    let supremum = entries.iter().map(|e| e.ratio).fold(0.0, f64::max);
    let all_finite = entries.iter().all(|e| e.n.is_some());
    Ok(ChainBoundReport {
        a0,
        supremum,
        all_finite,
        entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Sequential;
    use crate::generators::{generate, GeneratorSpec};

    #[test]
    fn lattice_ratio_is_order_one() {
        let g = generate(&GeneratorSpec::lattice(2, 65)).unwrap();
        let psi = ScalingFunction::power(2.0).unwrap();
        let x = 16 + 65 * 32;
        let y = 48 + 65 * 32;
        let rep = chain_bound_ratio(&g, &[(x, y)], &[1.0, 2.0, 32.0], 2.0, &psi, &Sequential).unwrap();
        assert!(rep.all_finite);
        let n: Vec<_> = rep.entries.iter().map(|e| e.n.unwrap()).collect();
        assert_eq!(n, vec![32, 16, 1]);
        assert_eq!(rep.supremum, 1.0);
    }

    #[test]
    fn epsilon_above_distance_is_rejected() {
        let g = generate(&GeneratorSpec::path(10)).unwrap();
        let psi = ScalingFunction::power(2.0).unwrap();
        assert!(chain_bound_ratio(&g, &[(0, 2)], &[3.0], 2.0, &psi, &Sequential).is_err());
    }
}
