//! Dense reference computations used as independent oracles.
#![allow(dead_code)]

use mmdlab_core::MetricMeasureGraph;

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
pub fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
        a.swap(c, p);
        b.swap(c, p);
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            if f != 0.0 {
                for k in c..n {
                    a[r][k] -= f * a[c][k];
                }
                b[r] -= f * b[c];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| a[r][k] * x[k]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    x
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
pub fn jacobi_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    for _ in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i][j] * a[i][j]).sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// All-pairs shortest path lengths by Floyd–Warshall over the edges.
pub fn floyd_warshall(g: &MetricMeasureGraph) -> Vec<Vec<f64>> {
    let n = g.len();
    let mut d = vec![vec![f64::INFINITY; n]; n];
    for (v, row) in d.iter_mut().enumerate() {
        row[v] = 0.0;
    }
    for e in g.edges() {
        d[e.u][e.v] = d[e.u][e.v].min(e.length);
        d[e.v][e.u] = d[e.v][e.u].min(e.length);
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    d
}

/// Graph Laplacian as a dense matrix.
pub fn dense_laplacian(g: &MetricMeasureGraph) -> Vec<Vec<f64>> {
    let n = g.len();
    let mut l = vec![vec![0.0; n]; n];
    for e in g.edges() {
        l[e.u][e.u] += e.conductance;
        l[e.v][e.v] += e.conductance;
        l[e.u][e.v] -= e.conductance;
        l[e.v][e.u] -= e.conductance;
    }
    l
}

/// Harmonic extension by a dense solve on `interior` with data `g` elsewhere.
pub fn dense_harmonic(g: &MetricMeasureGraph, interior: &[usize], data: &[f64]) -> Vec<f64> {
    let l = dense_laplacian(g);
    let k = interior.len();
    let mut a = vec![vec![0.0; k]; k];
    let mut b = vec![0.0; k];
    for (i, &v) in interior.iter().enumerate() {
        for (j, &u) in interior.iter().enumerate() {
            a[i][j] = l[v][u];
        }
        for u in 0..g.len() {
            if !interior.contains(&u) {
                b[i] -= l[v][u] * data[u];
            }
        }
    }
    let x = dense_solve(a, b);
    let mut out = data.to_vec();
    for (i, &v) in interior.iter().enumerate() {
        out[v] = x[i];
    }
    out
}

/// Breadth-first hop count on the dense proximity relation `d ≤ eps`
/// restricted to `inside`.
pub fn dense_chain(d: &[Vec<f64>], x: usize, y: usize, eps: f64, inside: &[bool]) -> Option<usize> {
    let n = d.len();
    let mut hops = vec![usize::MAX; n];
    hops[x] = 0;
    let mut frontier = vec![x];
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for &v in &frontier {
            for u in 0..n {
                if inside[u] && hops[u] == usize::MAX && d[v][u] <= eps {
                    hops[u] = hops[v] + 1;
                    next.push(u);
                }
            }
        }
        frontier = next;
    }
    (hops[y] != usize::MAX).then_some(hops[y])
}
