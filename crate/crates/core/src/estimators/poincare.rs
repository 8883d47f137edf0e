use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{dot, LinearSolver, SolverConfig, SymmetricMatrix};
use crate::math;
use crate::sample;
use crate::scaling::ScalingFunction;
use crate::space::{mask_of, MetricMeasureGraph, VertexId};
use crate::union_find::UnionFind;

/// Poincaré constant of one ball.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PoincareResult {
    /// `C_P`; infinite when the enlarged ball does not connect the ball.
    #[cfg_attr(feature = "serde", serde(with = "crate::serde_f64"))]
    pub constant: f64,
    /// Largest ratio of variance on the ball to energy on the enlarged ball.
    #[cfg_attr(feature = "serde", serde(with = "crate::serde_f64"))]
    pub eigenvalue: f64,
    /// Maximizer, indexed like `support`; empty when the constant is infinite.
    pub extremal: Vec<f64>,
    /// Vertices carrying `extremal`.
    pub support: Vec<VertexId>,
    /// Two ball vertices in different components of the enlarged ball.
    pub witness: Option<(VertexId, VertexId)>,
    pub iterations: usize,
    pub converged: bool,
}

const MAX_ITER: usize = 20_000;
const EIG_TOL: f64 = 1e-13;

/// `C_P` for `B(x,r)` with energy taken on `B(x,Ar)`.
///
/// The variance form on `B(x,r)` and the energy form on the component of
/// `B(x,Ar)` containing it (edges with both endpoints inside) define a
/// generalized eigenproblem; its largest eigenvalue `μ`, the reciprocal of the
/// smallest positive eigenvalue of energy against variance, is found by
/// inverse iteration and `C_P = μ / Ψ(r)`.
pub fn poincare_constant(
    space: &MetricMeasureGraph,
    x: VertexId,
    r: f64,
    enlargement: f64,
    psi: &ScalingFunction,
    config: &SolverConfig,
) -> Result<PoincareResult> {
    space.check_vertex(x)?;
    if !(enlargement >= 1.0) {
        return Err(Error::arg(format!("enlargement factor must be at least 1, got {enlargement}")));
    }
    if !(r > 0.0) {
        return Err(Error::arg(format!("radius must be positive, got {r}")));
    }
    let dist = space.distances_from(x);
    let ball: Vec<VertexId> = (0..space.len()).filter(|&v| dist[v] < r).collect();
    let big: Vec<VertexId> = (0..space.len()).filter(|&v| dist[v] < enlargement * r).collect();
    if ball.len() < 2 {
        return Err(Error::arg(format!("ball of radius {r} at vertex {x} has fewer than two vertices")));
    }
    poincare_on(space, &ball, &big, psi.eval(r), config)
}

/// Same as [`poincare_constant`] with explicit vertex sets; `ball ⊆ big`,
/// both sorted.
pub fn poincare_on(
    space: &MetricMeasureGraph,
    ball: &[VertexId],
    big: &[VertexId],
    psi_r: f64,
    config: &SolverConfig,
) -> Result<PoincareResult> {
    let n = space.len();
    let mut local = vec![usize::MAX; n];
    for (i, &v) in big.iter().enumerate() {
        local[v] = i;
    }
    if let Some(&v) = ball.iter().find(|&&v| local[v] == usize::MAX) {
        return Err(Error::arg(format!("vertex {v} of the ball lies outside the enlarged ball")));
    }
    let mut uf = UnionFind::new(big.len());
    for (i, &v) in big.iter().enumerate() {
        for (u, _) in space.neighbors(v) {
            if local[u] != usize::MAX {
                uf.union(i, local[u]);
            }
        }
    }
    let root = uf.find(local[ball[0]]);
    if let Some(&other) = ball.iter().find(|&&v| uf.find(local[v]) != root) {
        return Ok(PoincareResult {
            constant: f64::INFINITY,
            eigenvalue: f64::INFINITY,
            extremal: Vec::new(),
            support: Vec::new(),
            witness: Some((ball[0], other)),
            iterations: 0,
            converged: true,
        });
    }

    // Component containing the ball, with vertex `support[0]` grounded.
    let support: Vec<VertexId> = big.iter().copied().filter(|&v| uf.find(local[v]) == root).collect();
    for &v in big {
        local[v] = usize::MAX;
    }
    for (i, &v) in support.iter().enumerate() {
        local[v] = i;
    }
    let k = support.len();
    let in_ball = mask_of(n, ball);
    let mass: Vec<f64> = support.iter().map(|&v| if in_ball[v] { space.measure(v) } else { 0.0 }).collect();
    let total_mass: f64 = mass.iter().sum();

    // Grounded Laplacian on indices 1..k.
    let mut triplets = Vec::new();
    for (i, &v) in support.iter().enumerate().skip(1) {
        let mut diag = 0.0;
        for (u, e) in space.neighbors(v) {
            let j = local[u];
            if j == usize::MAX {
                continue;
            }
            diag += e.conductance;
            if j > i {
                triplets.push((i - 1, j - 1, -e.conductance));
            }
        }
        triplets.push((i - 1, i - 1, diag));
    }
    let solver = LinearSolver::new(SymmetricMatrix::from_triplets(k - 1, &triplets), *config)?;

    let variance_apply = |f: &[f64]| -> Vec<f64> {
        let mean = dot(&mass, f) / total_mass;
        f.iter().zip(&mass).map(|(fv, m)| m * (fv - mean)).collect()
    };
    let energy = |f: &[f64]| -> f64 {
        let mut e = 0.0;
        for (i, &v) in support.iter().enumerate() {
            for (u, edge) in space.neighbors(v) {
                let j = local[u];
                if j != usize::MAX && j > i {
                    let d = f[i] - f[j];
                    e += edge.conductance * d * d;
                }
            }
        }
        e
    };

    let mut rng = sample::rng(0x5eed);
    let mut f: Vec<f64> = (0..k).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut mu_prev = 0.0;
    let mut mu = 0.0;
    let mut iterations = 0;
    let mut converged = false;
    for it in 0..MAX_ITER {
        iterations = it + 1;
        let vf = variance_apply(&f);
        let sol = solver.solve(&vf[1..])?;
        let mut g = Vec::with_capacity(k);
        g.push(0.0);
        g.extend_from_slice(&sol.x);
        let vg = variance_apply(&g);
        let num = dot(&g, &vg);
        let den = energy(&g);
        if !(num > 0.0) {
            return Err(Error::Validation("inverse iteration collapsed onto constants".into()));
        }
        mu = num / den;
        let scale = 1.0 / math::sqrt(num);
        for (fi, gi) in f.iter_mut().zip(&g) {
            *fi = gi * scale;
        }
        if it > 2 && math::abs(mu - mu_prev) <= EIG_TOL * mu {
            converged = true;
            break;
        }
        mu_prev = mu;
    }
    let mean = dot(&mass, &f) / total_mass;
    for fi in f.iter_mut() {
        *fi -= mean;
    }
    Ok(PoincareResult {
        constant: mu / psi_r,
        eigenvalue: mu,
        extremal: f,
        support,
        witness: None,
        iterations,
        converged,
    })
}
