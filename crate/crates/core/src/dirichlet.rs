//! The discrete Dirichlet problem: solve the Laplace equation on a set of
//! interior vertices with prescribed values everywhere else.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{LinearSolver, Solution, SolverConfig, SymmetricMatrix};
use crate::space::{MetricMeasureGraph, VertexId};
use crate::union_find::UnionFind;

const NONE: usize = usize::MAX;

/// A factored Dirichlet problem, reusable for many boundary data.
#[derive(Debug, Clone)]
pub struct Dirichlet<'a> {
    space: &'a MetricMeasureGraph,
    interior: Vec<VertexId>,
    local: Vec<usize>,
    solver: Option<LinearSolver>,
}

/// Interior vertices grouped by the components of the induced subgraph that
/// have no neighbor outside the interior.
pub fn floating_components(space: &MetricMeasureGraph, interior: &[VertexId]) -> Vec<Vec<VertexId>> {
    let mut local = vec![NONE; space.len()];
    for (i, &v) in interior.iter().enumerate() {
        local[v] = i;
    }
    let mut uf = UnionFind::new(interior.len());
    let mut anchored = vec![false; interior.len()];
    for (i, &v) in interior.iter().enumerate() {
        for (u, _) in space.neighbors(v) {
            match local[u] {
                NONE => anchored[i] = true,
                j => {
                    uf.union(i, j);
                }
            }
        }
    }
    let mut root_anchored = vec![false; interior.len()];
    for i in 0..interior.len() {
        if anchored[i] {
            root_anchored[uf.find(i)] = true;
        }
    }
    let labels = uf.labels();
    let mut groups: Vec<Vec<VertexId>> = Vec::new();
    let mut group_of = vec![NONE; interior.len()];
    for i in 0..interior.len() {
        if root_anchored[uf.find(i)] {
            continue;
        }
        let l = labels[i];
        if group_of[l] == NONE {
            group_of[l] = groups.len();
            groups.push(Vec::new());
        }
        groups[group_of[l]].push(interior[i]);
    }
    groups
}

impl<'a> Dirichlet<'a> {
    /// `interior` must be sorted, duplicate free, and every component of it
    /// must have a neighbor outside.
    pub fn new(space: &'a MetricMeasureGraph, interior: &[VertexId], config: &SolverConfig) -> Result<Self> {
        for &v in interior {
            space.check_vertex(v)?;
        }
        if let Some(group) = floating_components(space, interior).first() {
            return Err(Error::arg(format!(
                "the component of the domain containing vertex {} has empty boundary",
                group[0]
            )));
        }
        let mut local = vec![NONE; space.len()];
        for (i, &v) in interior.iter().enumerate() {
            local[v] = i;
        }
        let mut triplets = Vec::new();
        for (i, &v) in interior.iter().enumerate() {
            let mut diag = 0.0;
            for (u, e) in space.neighbors(v) {
                diag += e.conductance;
                let j = local[u];
                if j != NONE && j > i {
                    triplets.push((i, j, -e.conductance));
                }
            }
            triplets.push((i, i, diag));
        }
        let solver = if interior.is_empty() {
            None
        } else {
            let matrix = SymmetricMatrix::from_triplets(interior.len(), &triplets);
            Some(LinearSolver::new(matrix, *config)?)
        };
        Ok(Self {
            space,
            interior: interior.to_vec(),
            local,
            solver,
        })
    }

    pub fn interior(&self) -> &[VertexId] {
        &self.interior
    }

    pub fn local_index(&self, v: VertexId) -> Option<usize> {
        match self.local[v] {
            NONE => None,
            i => Some(i),
        }
    }

    /// Interior values for the boundary data `g`, which is read only at
    /// non-interior neighbors of the interior.
    pub fn solve_with(&self, g: impl Fn(VertexId) -> f64) -> Result<Solution> {
        let mut rhs = vec![0.0; self.interior.len()];
        for (i, &v) in self.interior.iter().enumerate() {
            for (u, e) in self.space.neighbors(v) {
                if self.local[u] == NONE {
                    rhs[i] += e.conductance * g(u);
                }
            }
        }
        self.solve_rhs(&rhs)
    }

    pub fn solve_rhs(&self, rhs: &[f64]) -> Result<Solution> {
        match &self.solver {
            Some(s) => {
                let sol = s.solve(rhs)?;
                check_residual(&sol, s)?;
                Ok(sol)
            }
            None => Ok(Solution {
                x: Vec::new(),
                residual: 0.0,
                method: crate::linalg::SolverMethod::Direct,
                iterations: 0,
            }),
        }
    }

    pub fn tolerance(&self) -> f64 {
        self.solver.as_ref().map_or(0.0, |s| s.config().tol)
    }
}

fn check_residual(sol: &Solution, s: &LinearSolver) -> Result<()> {
    // Direct solves are accepted at a looser floor: their residual is
    // rounding, not truncation.
    let limit = s.config().tol.max(1e-9);
    if sol.residual > limit || !sol.residual.is_finite() {
        return Err(Error::Solver {
            method: match sol.method {
                crate::linalg::SolverMethod::Direct => "direct",
                crate::linalg::SolverMethod::ConjugateGradient => "conjugate-gradient",
            },
            iterations: sol.iterations,
            residual: sol.residual,
        });
    }
    Ok(())
}
