//! Sparse symmetric positive definite solves.
//!
//! Small systems are factored once by an envelope Cholesky under reverse
//! Cuthill-McKee ordering and then back-solved for any number of right-hand
//! sides. Large systems use Jacobi-preconditioned conjugate gradients.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;

/// Symmetric matrix in compressed sparse row form with both triangles stored.
#[derive(Debug, Clone)]
pub struct SymmetricMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl SymmetricMatrix {
    /// Sums duplicate entries. An off-diagonal `(i, j, v)` contributes to both
    /// `(i, j)` and `(j, i)`.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut entries: Vec<(usize, usize, f64)> = Vec::with_capacity(2 * triplets.len());
        for &(i, j, v) in triplets {
            entries.push((i, j, v));
            if i != j {
                entries.push((j, i, v));
            }
        }
        entries.sort_unstable_by_key(|a| (a.0, a.1));
        let mut row_ptr = vec![0usize; n + 1];
        let mut cols = Vec::with_capacity(entries.len());
        let mut vals: Vec<f64> = Vec::with_capacity(entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in entries {
            if last == Some((i, j)) {
                *vals.last_mut().unwrap() += v;
            } else {
                cols.push(j);
                vals.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self { n, row_ptr, cols, vals }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.vals[r].iter().copied())
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.row(i).find(|&(j, _)| j == i).map_or(0.0, |(_, v)| v))
            .collect()
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate().take(self.n) {
            *yi = self.row(i).map(|(j, v)| v * x[j]).sum();
        }
    }
}

/// Reverse Cuthill-McKee ordering; `perm[new] = old`.
pub fn reverse_cuthill_mckee(a: &SymmetricMatrix) -> Vec<usize> {
    let n = a.dim();
    let degree: Vec<usize> = (0..n).map(|i| a.row(i).filter(|&(j, _)| j != i).count()).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&i| (degree[i], i));
    let mut level = vec![usize::MAX; n];
    for &seed in &by_degree {
        if visited[seed] {
            continue;
        }
        let start = pseudo_peripheral(a, seed, &degree, &mut level);
        visited[start] = true;
        let mut queue = VecDeque::from([start]);
        let mut nbrs = Vec::new();
        while let Some(v) = queue.pop_front() {
            order.push(v);
            nbrs.clear();
            nbrs.extend(a.row(v).map(|(j, _)| j).filter(|&j| !visited[j]));
            nbrs.sort_by_key(|&j| (degree[j], j));
            for &j in &nbrs {
                visited[j] = true;
                queue.push_back(j);
            }
        }
    }
    order.reverse();
    order
}

/// Last vertex of the deepest BFS level structure found from `seed`,
/// refined a few times.
fn pseudo_peripheral(a: &SymmetricMatrix, seed: usize, degree: &[usize], level: &mut [usize]) -> usize {
    let mut start = seed;
    let mut best_depth = 0;
    for _ in 0..4 {
        let (depth, last_level) = bfs_levels(a, start, level);
        let far = *last_level.iter().min_by_key(|&&v| (degree[v], v)).unwrap();
        if depth <= best_depth {
            break;
        }
        best_depth = depth;
        start = far;
    }
    start
}

fn bfs_levels(a: &SymmetricMatrix, start: usize, level: &mut [usize]) -> (usize, Vec<usize>) {
    let mut touched = vec![start];
    level[start] = 0;
    let mut frontier = vec![start];
    let mut depth = 0;
    loop {
        let mut next = Vec::new();
        for &v in &frontier {
            for (j, _) in a.row(v) {
                if level[j] == usize::MAX {
                    level[j] = depth + 1;
                    next.push(j);
                    touched.push(j);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        depth += 1;
        frontier = next;
    }
    for v in touched {
        level[v] = usize::MAX;
    }
    (depth, frontier)
}

/// Envelope Cholesky factor `P A Pᵀ = L Lᵀ`.
#[derive(Debug, Clone)]
pub struct SkylineCholesky {
    perm: Vec<usize>,
    first: Vec<usize>,
    start: Vec<usize>,
    values: Vec<f64>,
}

impl SkylineCholesky {
    /// Envelope size of `a` under `perm`, without factoring.
    pub fn envelope_size(a: &SymmetricMatrix, perm: &[usize]) -> usize {
        let inv = inverse(perm);
        (0..a.dim())
            .map(|i| {
                let first = a.row(perm[i]).map(|(j, _)| inv[j]).min().unwrap_or(i).min(i);
                i - first + 1
            })
            .sum()
    }

    pub fn factor(a: &SymmetricMatrix, perm: Vec<usize>) -> Result<Self> {
        let n = a.dim();
        let inv = inverse(&perm);
        let mut first = vec![0usize; n];
        let mut start = vec![0usize; n + 1];
        for i in 0..n {
            first[i] = a.row(perm[i]).map(|(j, _)| inv[j]).min().unwrap_or(i).min(i);
            start[i + 1] = start[i] + (i - first[i] + 1);
        }
        let mut values = vec![0.0; start[n]];
        for i in 0..n {
            for (j, v) in a.row(perm[i]) {
                let jj = inv[j];
                if jj <= i {
                    values[start[i] + jj - first[i]] += v;
                }
            }
        }
        for i in 0..n {
            let fi = first[i];
            let si = start[i];
            for j in fi..i {
                let fj = first[j];
                let k0 = fi.max(fj);
                let sj = start[j];
                let mut s = values[si + j - fi];
                let ri = &values[si + k0 - fi..si + j - fi];
                let rj = &values[sj + k0 - fj..sj + j - fj];
                s -= dot(ri, rj);
                values[si + j - fi] = s / values[sj + j - fj];
            }
            let row = &values[si..si + i - fi];
            let pivot = values[si + i - fi] - dot(row, row);
            if !(pivot > 0.0) || !pivot.is_finite() {
                return Err(Error::NotPositiveDefinite { row: perm[i], pivot });
            }
            values[si + i - fi] = math::sqrt(pivot);
        }
        Ok(Self { perm, first, start, values })
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut y: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let fi = self.first[i];
            let si = self.start[i];
            let s = dot(&self.values[si..si + i - fi], &y[fi..i]);
            y[i] = (y[i] - s) / self.values[si + i - fi];
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let si = self.start[i];
            let xi = y[i] / self.values[si + i - fi];
            y[i] = xi;
            for (k, l) in (fi..i).zip(&self.values[si..si + i - fi]) {
                y[k] -= l * xi;
            }
        }
        let mut x = vec![0.0; n];
        for (i, &p) in self.perm.iter().enumerate() {
            x[p] = y[i];
        }
        x
    }
}

fn inverse(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; perm.len()];
    for (i, &p) in perm.iter().enumerate() {
        inv[p] = i;
    }
    inv
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    math::sqrt(dot(a, a))
}

/// Which algorithm a [`LinearSolver`] uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum SolverMethod {
    Direct,
    ConjugateGradient,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct SolverConfig {
    /// Relative residual target for conjugate gradients.
    pub tol: f64,
    /// Iteration cap; `None` means ten times the system size.
    pub max_iter: Option<usize>,
    /// Largest system factored directly.
    pub direct_limit: usize,
    /// Largest envelope (stored factor entries) attempted directly.
    pub max_envelope: usize,
    /// Overrides the size-based choice.
    pub force: Option<SolverMethod>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: None,
            direct_limit: 20_000,
            max_envelope: 60_000_000,
            force: None,
        }
    }
}

/// Solution of one right-hand side.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub x: Vec<f64>,
    /// `‖b − Ax‖ / ‖b‖`, zero for `b = 0`.
    pub residual: f64,
    pub method: SolverMethod,
    /// Conjugate gradient iterations; zero for direct solves.
    pub iterations: usize,
}

/// A matrix prepared for repeated solves.
#[derive(Debug, Clone)]
pub struct LinearSolver {
    matrix: SymmetricMatrix,
    config: SolverConfig,
    factor: Option<SkylineCholesky>,
    inv_diag: Vec<f64>,
}

impl LinearSolver {
    pub fn new(matrix: SymmetricMatrix, config: SolverConfig) -> Result<Self> {
        let n = matrix.dim();
        let method = match config.force {
            Some(m) => m,
            None if n <= config.direct_limit => SolverMethod::Direct,
            None => SolverMethod::ConjugateGradient,
        };
        let mut factor = None;
        if method == SolverMethod::Direct && n > 0 {
            let perm = reverse_cuthill_mckee(&matrix);
            if config.force == Some(SolverMethod::Direct)
                || SkylineCholesky::envelope_size(&matrix, &perm) <= config.max_envelope
            {
                factor = Some(SkylineCholesky::factor(&matrix, perm)?);
            }
        }
        let inv_diag = if factor.is_none() {
            let d = matrix.diagonal();
            for (i, &v) in d.iter().enumerate() {
                if !(v > 0.0) {
                    return Err(Error::NotPositiveDefinite { row: i, pivot: v });
                }
            }
            d.iter().map(|v| 1.0 / v).collect()
        } else {
            Vec::new()
        };
        Ok(Self { matrix, config, factor, inv_diag })
    }

    pub fn method(&self) -> SolverMethod {
        if self.factor.is_some() {
            SolverMethod::Direct
        } else {
            SolverMethod::ConjugateGradient
        }
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn matrix(&self) -> &SymmetricMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn solve(&self, b: &[f64]) -> Result<Solution> {
        let n = self.dim();
        if b.len() != n {
            return Err(Error::arg("right-hand side length does not match the system"));
        }
        let bn = norm(b);
        if bn == 0.0 {
            return Ok(Solution {
                x: vec![0.0; n],
                residual: 0.0,
                method: self.method(),
                iterations: 0,
            });
        }
        match &self.factor {
            Some(f) => {
                let x = f.solve(b);
                let residual = self.residual(&x, b) / bn;
                Ok(Solution {
                    x,
                    residual,
                    method: SolverMethod::Direct,
                    iterations: 0,
                })
            }
            None => self.conjugate_gradient(b, bn),
        }
    }

    fn residual(&self, x: &[f64], b: &[f64]) -> f64 {
        let mut ax = vec![0.0; b.len()];
        self.matrix.matvec(x, &mut ax);
        let r: f64 = ax.iter().zip(b).map(|(a, b)| (b - a) * (b - a)).sum();
        math::sqrt(r)
    }

    fn conjugate_gradient(&self, b: &[f64], bn: f64) -> Result<Solution> {
        let n = self.dim();
        let max_iter = self.config.max_iter.unwrap_or(10 * n.max(1));
        let tol = self.config.tol;
        let mut x = vec![0.0; n];
        let mut r = b.to_vec();
        let mut z: Vec<f64> = r.iter().zip(&self.inv_diag).map(|(r, d)| r * d).collect();
        let mut p = z.clone();
        let mut ap = vec![0.0; n];
        let mut rz = dot(&r, &z);
        let mut rel = 1.0;
        for it in 0..max_iter {
            self.matrix.matvec(&p, &mut ap);
            let alpha = rz / dot(&p, &ap);
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            rel = norm(&r) / bn;
            if rel <= tol {
                let residual = self.residual(&x, b) / bn;
                return Ok(Solution {
                    x,
                    residual,
                    method: SolverMethod::ConjugateGradient,
                    iterations: it + 1,
                });
            }
            for i in 0..n {
                z[i] = r[i] * self.inv_diag[i];
            }
            let rz_next = dot(&r, &z);
            let beta = rz_next / rz;
            rz = rz_next;
            for i in 0..n {
                p[i] = z[i] + beta * p[i];
            }
        }
        Err(Error::Solver {
            method: "conjugate-gradient",
            iterations: max_iter,
            residual: rel,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Dense Gaussian elimination with partial pivoting.
    fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
        let n = b.len();
        for c in 0..n {
            let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
            a.swap(c, p);
            b.swap(c, p);
            for r in c + 1..n {
                let f = a[r][c] / a[c][c];
                for k in c..n {
                    a[r][k] -= f * a[c][k];
                }
                b[r] -= f * b[c];
            }
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|k| a[i][k] * x[k]).sum();
            x[i] = (b[i] - s) / a[i][i];
        }
        x
    }

    /// Random grounded Laplacian-like SPD system.
    fn spd(n: usize, edges: &[(usize, usize, f64)], ground: &[f64]) -> (SymmetricMatrix, Vec<Vec<f64>>) {
        let mut dense = vec![vec![0.0; n]; n];
        let mut trip = Vec::new();
        for &(u, v, c) in edges {
            let (u, v) = (u % n, v % n);
            if u == v {
                continue;
            }
            trip.push((u, v, -c));
            trip.push((u, u, c));
            trip.push((v, v, c));
            dense[u][v] -= c;
            dense[v][u] -= c;
            dense[u][u] += c;
            dense[v][v] += c;
        }
        for (i, &g) in ground.iter().enumerate().take(n) {
            trip.push((i, i, g));
            dense[i][i] += g;
        }
        (SymmetricMatrix::from_triplets(n, &trip), dense)
    }

    #[test]
    fn rcm_is_a_permutation() {
        let (a, _) = spd(6, &[(0, 5, 1.0), (5, 2, 1.0), (2, 4, 1.0), (1, 3, 1.0)], &[1.0; 6]);
        let mut p = reverse_cuthill_mckee(&a);
        p.sort();
        assert_eq!(p, (0..6).collect::<Vec<_>>());
    }

    #[test]
    fn indefinite_matrix_is_reported() {
        let a = SymmetricMatrix::from_triplets(2, &[(0, 0, 1.0), (1, 1, 1.0), (0, 1, 2.0)]);
        assert!(matches!(
            LinearSolver::new(a, SolverConfig::default()),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn cg_reports_non_convergence() {
        let (a, _) = spd(50, &(0..49).map(|i| (i, i + 1, 1.0)).collect::<Vec<_>>(), &[1e-6; 50]);
        let cfg = SolverConfig {
            force: Some(SolverMethod::ConjugateGradient),
            max_iter: Some(2),
            ..SolverConfig::default()
        };
        let s = LinearSolver::new(a, cfg).unwrap();
        let b: Vec<f64> = (0..50).map(|i| i as f64).collect();
        assert!(matches!(s.solve(&b), Err(Error::Solver { iterations: 2, .. })));
    }

    proptest! {
        #[test]
        fn direct_and_cg_match_dense(
            n in 2usize..40,
            edges in proptest::collection::vec((0usize..40, 0usize..40, 0.1f64..10.0), 1..120),
            ground in proptest::collection::vec(0.01f64..2.0, 40),
            b in proptest::collection::vec(-3.0f64..3.0, 40),
        ) {
            let (a, dense) = spd(n, &edges, &ground[..n]);
            let b = &b[..n];
            let oracle = dense_solve(dense, b.to_vec());
            let direct = LinearSolver::new(a.clone(), SolverConfig::default()).unwrap();
            prop_assert_eq!(direct.method(), SolverMethod::Direct);
            let cg = LinearSolver::new(a, SolverConfig { force: Some(SolverMethod::ConjugateGradient), tol: 1e-13, ..SolverConfig::default() }).unwrap();
            let xd = direct.solve(b).unwrap();
            let xc = cg.solve(b).unwrap();
            let scale = oracle.iter().fold(1.0f64, |m, v| m.max(v.abs()));
            for i in 0..n {
                prop_assert!((xd.x[i] - oracle[i]).abs() < 1e-8 * scale);
                prop_assert!((xc.x[i] - oracle[i]).abs() < 1e-6 * scale);
            }
            prop_assert!(xd.residual < 1e-10);
        }
    }
}
