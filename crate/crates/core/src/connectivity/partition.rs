use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::scaling::ScalingFunction;
use crate::space::{MetricMeasureGraph, Neighborhood, VertexId};

/// Normalized bumps subordinate to an ε-net.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PartitionOfUnity {
    pub epsilon: f64,
    pub net: Vec<VertexId>,
    /// `ψ_z` for each net point, as `(vertex, value)` sorted by vertex, zero
    /// elsewhere.
    pub functions: Vec<Vec<(VertexId, f64)>>,
    /// Vertices no bump reaches; every `ψ_z` vanishes there.
    pub uncovered: Vec<VertexId>,
    /// `E(ψ_z, ψ_z)` over edges with both endpoints covered.
    pub energies: Vec<f64>,
    /// `m(B(z, ε))`.
    pub ball_measures: Vec<f64>,
    /// `max_z E(ψ_z,ψ_z) Ψ(ε) / m(B(z,ε))`.
    pub constant: f64,
}

impl PartitionOfUnity {
    /// `ψ_z(v)` for the `i`-th net point.
    pub fn value(&self, i: usize, v: VertexId) -> f64 {
        let f = &self.functions[i];
        f.binary_search_by_key(&v, |p| p.0).map_or(0.0, |k| f[k].1)
    }

    /// `Σ_z ψ_z` at every vertex of a space with `len` vertices.
    pub fn sum(&self, len: usize) -> Vec<f64> {
        let mut s = vec![0.0; len];
        for f in &self.functions {
            for &(v, x) in f {
                s[v] += x;
            }
        }
        s
    }
}

/// Partition of unity over the ε-net of `region`.
///
/// With the cores `κ_z = clamp(2 − 4d(z,·)/ε, 0, 1)` and the bumps
/// `φ_z = clamp((5ε/4 − d(z,·))/ε, 0, 1)`,
/// `ψ_z = κ_z + (1 − Σ_w κ_w) φ_z / Σ_w φ_w` where `Σ φ > 0`.
/// Net points are `ε` apart, so the cores have disjoint supports and
/// `Σ κ ≤ 1`; on `B(z,ε/4)` the core of `z` is 1, which makes `ψ_z ≡ 1` and
/// every other `ψ_{z′} ≡ 0` there. Both pieces are `4/ε`-Lipschitz in `d`.
pub fn build_partition_of_unity(
    space: &MetricMeasureGraph,
    region: &[VertexId],
    epsilon: f64,
    psi: &ScalingFunction,
) -> Result<PartitionOfUnity> {
    let h = space.min_edge_length();
    if !(epsilon >= 4.0 * h) || !epsilon.is_finite() {
        return Err(Error::arg(format!("epsilon {epsilon} must be at least 4 times the minimum edge length {h}")));
    }
    let net = space.epsilon_net(region, epsilon)?;
    let n = space.len();
    let mut search = Neighborhood::new(space);
    let mut near = Vec::new();

    // (vertex, κ_z, φ_z) over the support of φ_z.
    let mut bumps: Vec<Vec<(VertexId, f64, f64)>> = Vec::with_capacity(net.len());
    let mut ball_measures = Vec::with_capacity(net.len());
    let mut core = vec![0.0; n];
    let mut total = vec![0.0; n];
    for &z in &net {
        search.within(z, 1.25 * epsilon, &mut near);
        let mut mass = 0.0;
        let mut bump = Vec::with_capacity(near.len());
        for &(v, d) in &near {
            if d < epsilon {
                mass += space.measure(v);
            }
            let phi = ((1.25 * epsilon - d) / epsilon).clamp(0.0, 1.0);
            if phi > 0.0 {
                let kappa = (2.0 - 4.0 * d / epsilon).clamp(0.0, 1.0);
                core[v] += kappa;
                total[v] += phi;
                bump.push((v, kappa, phi));
            }
        }
        bumps.push(bump);
        ball_measures.push(mass);
    }
    let uncovered: Vec<VertexId> = (0..n).filter(|&v| total[v] == 0.0).collect();
    let functions: Vec<Vec<(VertexId, f64)>> = bumps
        .into_iter()
        .map(|b| {
            b.into_iter()
                .map(|(v, kappa, phi)| (v, (kappa + (1.0 - core[v]) * phi / total[v]).min(1.0)))
                .filter(|&(_, x)| x > 0.0)
                .collect()
        })
        .collect();

    let mut energies = Vec::with_capacity(net.len());
    let mut constant: f64 = 0.0;
    let scale = psi.eval(epsilon);
    for (i, f) in functions.iter().enumerate() {
        let mut e = 0.0;
        for &(v, fv) in f {
            for (u, edge) in space.neighbors(v) {
                if total[u] == 0.0 {
                    continue;
                }
                // Edges inside the support are visited from both ends.
                let (fu, weight) = match f.binary_search_by_key(&u, |p| p.0) {
                    Ok(k) => (f[k].1, 0.5),
                    Err(_) => (0.0, 1.0),
                };
                let diff = fv - fu;
                e += weight * edge.conductance * diff * diff;
            }
        }
        energies.push(e);
        constant = constant.max(e * scale / ball_measures[i]);
    }
    Ok(PartitionOfUnity {
        epsilon,
        net,
        functions,
        uncovered,
        energies,
        ball_measures,
        constant,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{generate, GeneratorSpec};

    fn psi2() -> ScalingFunction {
        ScalingFunction::power(2.0).unwrap()
    }

    #[test]
    fn path_partition_sums_to_one() {
        let g = generate(&GeneratorSpec::path(10)).unwrap();
        let all: Vec<_> = (0..g.len()).collect();
        assert!(build_partition_of_unity(&g, &all, 2.0, &psi2()).is_err());
        let p = build_partition_of_unity(&g, &all, 4.0, &psi2()).unwrap();
        assert_eq!(p.net, vec![0, 4, 8]);
        assert!(p.uncovered.is_empty());
        for s in p.sum(g.len()) {
            assert!((s - 1.0).abs() < 1e-15);
        }
        // Cores cover 0..=1 and 3..=5; at 2 only φ_0 = φ_4 = 3/4 remain.
        let psi0 = [1.0, 1.0, 0.5, 0.0, 0.0];
        for (v, want) in psi0.iter().enumerate() {
            assert!((p.value(0, v) - want).abs() < 1e-15);
        }
        assert_eq!(p.value(1, 0), 0.0);
        assert_eq!(p.energies[0], 0.5);
        assert_eq!(p.ball_measures[0], 4.0);
        // ψ_4 = (0, 0, 1/2, 1, 1, 1, 1/2, 0, 0) on 0..=8: two ramps, ball 7.
        assert_eq!(p.energies[1], 1.0);
        assert_eq!(p.ball_measures[1], 7.0);
        assert_eq!(p.constant, 16.0 / 7.0);
    }

    #[test]
    fn fine_interval_partition() {
        let mut b = crate::space::GraphBuilder::new(crate::space::MetricMode::Graph);
        for _ in 0..21 {
            b.add_vertex(0.5).unwrap();
        }
        for v in 0..20 {
            b.add_edge_with_length(v, v + 1, 2.0, 0.5).unwrap();
        }
        let g = b.build().unwrap();
        let all: Vec<_> = (0..g.len()).collect();
        let p = build_partition_of_unity(&g, &all, 2.0, &psi2()).unwrap();
        assert_eq!(p.net, vec![0, 4, 8, 12, 16, 20]);
        for s in p.sum(g.len()) {
            assert!((s - 1.0).abs() < 1e-15);
        }
        for (i, &z) in p.net.iter().enumerate() {
            for v in 0..g.len() {
                let d = g.distance(z, v);
                let x = p.value(i, v);
                assert!((0.0..=1.0).contains(&x));
                if d < 0.5 {
                    assert_eq!(x, 1.0);
                }
                if d >= 2.5 {
                    assert_eq!(x, 0.0);
                }
            }
        }
    }

    #[test]
    fn single_point_covers_everything() {
        let g = generate(&GeneratorSpec::path(2)).unwrap();
        let p = build_partition_of_unity(&g, &[1], 4.0, &psi2()).unwrap();
        assert_eq!(p.net, vec![1]);
        assert_eq!(p.functions[0], vec![(0, 1.0), (1, 1.0), (2, 1.0)]);
        assert_eq!(p.energies[0], 0.0);
        assert_eq!(p.constant, 0.0);
    }

    #[test]
    fn subregion_leaves_far_vertices_uncovered() {
        let g = generate(&GeneratorSpec::path(20)).unwrap();
        let p = build_partition_of_unity(&g, &[0, 1, 2], 4.0, &psi2()).unwrap();
        assert_eq!(p.uncovered, (5..=20).collect::<Vec<_>>());
    }
}
