use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::scaling::ScalingFunction;
use crate::space::{MetricMeasureGraph, Neighborhood, VertexId};

/// `M_R ν(x) = sup_{0<r<R} ν(B(x,r)) / m(B(x,r))`.
///
/// Strict balls only change at realized distances, so the supremum runs over
/// the closed balls `{d ≤ d_j}` with `d_j < R`.
pub fn truncated_maximal(space: &MetricMeasureGraph, nu: &[f64], x: VertexId, big_r: f64) -> Result<f64> {
    space.check_vertex(x)?;
    if nu.len() != space.len() {
        return Err(Error::arg(format!("measure has {} entries for {} vertices", nu.len(), space.len())));
    }
    if !(big_r > 0.0) {
        return Err(Error::arg(format!("R must be positive, got {big_r}")));
    }
    let mut near = Vec::new();
    Neighborhood::new(space).within(x, big_r, &mut near);
    Ok(maximal_from(space, nu, &mut near, big_r))
}

fn maximal_from(space: &MetricMeasureGraph, nu: &[f64], near: &mut Vec<(VertexId, f64)>, big_r: f64) -> f64 {
    near.retain(|&(_, d)| d < big_r);
    near.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    let (mut num, mut den, mut best) = (0.0, 0.0, 0.0f64);
    for (k, &(v, d)) in near.iter().enumerate() {
        num += nu[v];
        den += space.measure(v);
        if near.get(k + 1).is_none_or(|next| next.1 > d) {
            best = best.max(num / den);
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TwoPointEntry {
    pub x: VertexId,
    pub y: VertexId,
    /// `|u(x) − u(y)|²`.
    pub difference: f64,
    pub maximal_x: f64,
    pub maximal_y: f64,
    /// Smallest `C` for this pair; infinite on a violation.
    #[cfg_attr(feature = "serde", serde(with = "crate::serde_f64"))]
    pub required: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TwoPointReport {
    /// Smallest `C` feasible for every pair.
    #[cfg_attr(feature = "serde", serde(with = "crate::serde_f64"))]
    pub constant: f64,
    /// Pairs with `u(x) ≠ u(y)` but vanishing maximal functions.
    pub violations: Vec<(VertexId, VertexId)>,
    pub pass: bool,
    pub entries: Vec<TwoPointEntry>,
}

/// Fits `|u(x)−u(y)|² ≤ C Ψ(R) (M_R Γ(u,u)(x) + M_R Γ(u,u)(y))` over pairs
/// in `B(x₀, R/C_P)`.
pub fn two_point_check(
    space: &MetricMeasureGraph,
    u: &[f64],
    x0: VertexId,
    big_r: f64,
    pairs: &[(VertexId, VertexId)],
    psi: &ScalingFunction,
    c_p: f64,
) -> Result<TwoPointReport> {
    space.check_vertex(x0)?;
    if !(c_p >= 1.0) || !(big_r > 0.0) {
        return Err(Error::arg("need R > 0 and C_P >= 1"));
    }
    let gamma = space.energy_measure_vector(u)?;
    let dist = space.distances_from(x0);
    let limit = big_r / c_p;
    let mut near = Neighborhood::new(space);
    let mut buf = Vec::new();
    let mut maximal = |v: VertexId| {
        near.within(v, big_r, &mut buf);
        maximal_from(space, &gamma, &mut buf, big_r)
    };
    let scale = psi.eval(big_r);
    let mut entries = Vec::with_capacity(pairs.len());
    let mut violations = Vec::new();
    let mut constant: f64 = 0.0;
    for &(x, y) in pairs {
        space.check_vertex(x)?;
        space.check_vertex(y)?;
        if !(dist[x] < limit && dist[y] < limit) {
            return Err(Error::arg(format!("pair ({x}, {y}) leaves the ball of radius {limit}")));
        }
        let diff = u[x] - u[y];
        let difference = diff * diff;
        let (mx, my) = (maximal(x), maximal(y));
        let rhs = scale * (mx + my);
        let required = if difference == 0.0 {
            0.0
        } else if rhs > 0.0 {
            difference / rhs
        } else {
            violations.push((x, y));
            f64::INFINITY
        };
        constant = constant.max(required);
        entries.push(TwoPointEntry {
            x,
            y,
            difference,
            maximal_x: mx,
            maximal_y: my,
            required,
        });
    }
    Ok(TwoPointReport {
        constant,
        pass: violations.is_empty(),
        violations,
        entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{all_pairs, generate, GeneratorSpec};
    use crate::space::{GraphBuilder, MetricMode};
    use alloc::vec;

    #[test]
    fn maximal_of_reference_measure_is_one() {
        let g = generate(&GeneratorSpec::lattice(2, 9)).unwrap();
        let m = g.measures().to_vec();
        assert_eq!(truncated_maximal(&g, &m, 40, 3.0).unwrap(), 1.0);
        let mut point = vec![0.0; g.len()];
        point[40] = 1.0;
        assert_eq!(truncated_maximal(&g, &point, 40, 3.0).unwrap(), 1.0);
        assert_eq!(truncated_maximal(&g, &point, 41, 1.0).unwrap(), 0.0);
        assert_eq!(truncated_maximal(&g, &point, 41, 1.5).unwrap(), 0.2);
    }

    #[test]
    fn maximal_matches_radius_scan() {
        let g = generate(&GeneratorSpec::path(40)).unwrap();
        let u: Vec<f64> = (0..g.len()).map(|v| (v as f64).powi(2) / 40.0).collect();
        let nu = g.energy_measure_vector(&u).unwrap();
        let x = 20;
        for big_r in [1.0, 2.5, 7.0, 16.0] {
            let mut best: f64 = 0.0;
            let mut r = 0.05;
            while r < big_r {
                let ball = g.ball(x, r).unwrap();
                let a: f64 = ball.iter().map(|&v| nu[v]).sum();
                best = best.max(a / g.measure_sum(&ball));
                r += 0.05;
            }
            let got = truncated_maximal(&g, &nu, x, big_r).unwrap();
            assert!((got - best).abs() < 1e-14, "R = {big_r}: {got} vs {best}");
        }
    }

    #[test]
    fn constant_function_passes() {
        let g = generate(&GeneratorSpec::path(20)).unwrap();
        let psi = ScalingFunction::power(2.0).unwrap();
        let pairs = vec![(8, 12), (9, 11)];
        let rep = two_point_check(&g, &vec![3.0; g.len()], 10, 8.0, &pairs, &psi, 1.0).unwrap();
        assert!(rep.pass);
        assert_eq!(rep.constant, 0.0);
    }

    #[test]
    fn linear_function_constant_is_scale_free() {
        let g = generate(&GeneratorSpec::path(200)).unwrap();
        let psi = ScalingFunction::power(2.0).unwrap();
        let u: Vec<f64> = (0..g.len()).map(|v| v as f64).collect();
        let mut constants = Vec::new();
        for big_r in [8.0, 16.0, 32.0] {
            let ball = g.ball(100, big_r / 2.0).unwrap();
            let pairs: Vec<_> = all_pairs(ball.len()).into_iter().map(|(i, j)| (ball[i], ball[j])).collect();
            let rep = two_point_check(&g, &u, 100, big_r, &pairs, &psi, 2.0).unwrap();
            assert!(rep.pass);
            constants.push(rep.constant);
        }
        for c in &constants {
            assert!(*c > 0.05 && *c < 1.0, "{constants:?}");
        }
    }

    #[test]
    fn cut_indicator_is_a_violation() {
        let mut b = GraphBuilder::new(MetricMode::Euclid);
        for x in [0.0, 1.0, 2.0, 3.0] {
            b.add_vertex_at(1.0, &[x]).unwrap();
        }
        b.add_edge(0, 1, 1.0).unwrap();
        b.add_edge(2, 3, 1.0).unwrap();
        let g = b.build().unwrap();
        let psi = ScalingFunction::power(2.0).unwrap();
        let rep = two_point_check(&g, &[0.0, 0.0, 1.0, 1.0], 1, 4.0, &[(1, 2)], &psi, 1.0).unwrap();
        assert!(!rep.pass);
        assert_eq!(rep.violations, vec![(1, 2)]);
    }
}
