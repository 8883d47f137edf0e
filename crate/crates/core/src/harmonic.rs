//! Harmonic functions, harmonic measure and exact Harnack constants.
//!
//! The boundary `∂D` of a domain `D` is the set of vertices outside `D`
//! adjacent to it. A function is harmonic in `D` when
//! `Σ_{u~v} c_uv (h(v) − h(u)) = 0` at every `v ∈ D`.
//!
//! On a finite graph every nonnegative harmonic function in `D` is
//! `h(y) = Σ_z K(y,z) h(z)` with nonnegative boundary values, so the cone of
//! such functions is generated by the columns `K(·,z)`. The best Harnack
//! constant on an evaluation set `S` is therefore
//! `max_z max_{y,y′∈S} K(y,z)/K(y′,z)`, computed exactly.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::dirichlet::{floating_components, Dirichlet};
use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::generators::{apply_weight, weight_admissibility_check, AdmissibilityReport, WeightSpec};
use crate::linalg::SolverConfig;
use crate::sample;
use crate::space::{mask_of, MetricMeasureGraph, VertexId};

/// Default cap on Harnack constants for verdicts.
pub const DEFAULT_HARNACK_CAP: f64 = 1e3;

/// Vertices outside `domain` adjacent to it, ascending.
pub fn vertex_boundary(space: &MetricMeasureGraph, domain: &[VertexId]) -> Vec<VertexId> {
    let inside = mask_of(space.len(), domain);
    let mut seen = vec![false; space.len()];
    for &v in domain {
        for (u, _) in space.neighbors(v) {
            if !inside[u] {
                seen[u] = true;
            }
        }
    }
    (0..space.len()).filter(|&v| seen[v]).collect()
}

fn check_domain(space: &MetricMeasureGraph, domain: &[VertexId]) -> Result<Vec<VertexId>> {
    let mut d = domain.to_vec();
    for &v in &d {
        space.check_vertex(v)?;
    }
    d.sort_unstable();
    d.dedup();
    if d.is_empty() {
        return Err(Error::arg("domain is empty"));
    }
    if let Some(group) = floating_components(space, &d).first() {
        return Err(Error::arg(format!(
            "the component of the domain containing vertex {} has empty boundary",
            group[0]
        )));
    }
    Ok(d)
}

/// Solution of the Dirichlet problem in `domain` with boundary data `g`.
///
/// Returns a vector over all vertices: `h` on the domain, `g` elsewhere.
pub fn harmonic_extension(space: &MetricMeasureGraph, domain: &[VertexId], g: &[f64], config: &SolverConfig) -> Result<Vec<f64>> {
    if g.len() != space.len() {
        return Err(Error::arg(format!("boundary data has {} entries for {} vertices", g.len(), space.len())));
    }
    let domain = check_domain(space, domain)?;
    let boundary = vertex_boundary(space, &domain);
    if let Some(&z) = boundary.iter().find(|&&z| !g[z].is_finite()) {
        return Err(Error::arg(format!("boundary value at vertex {z} is not finite")));
    }
    let problem = Dirichlet::new(space, &domain, config)?;
    let sol = problem.solve_with(|u| g[u])?;
    let mut h = g.to_vec();
    for (i, &v) in domain.iter().enumerate() {
        h[v] = sol.x[i];
    }
    Ok(h)
}

/// `K(y,z)`: the harmonic extension of the indicator of `z ∈ ∂D`, at `y ∈ D`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HarmonicMeasureMatrix {
    pub domain: Vec<VertexId>,
    pub boundary: Vec<VertexId>,
    /// Row-major, one row per domain vertex.
    pub values: Vec<f64>,
}

impl HarmonicMeasureMatrix {
    /// Checks dimensions of assembled or deserialized data.
    pub fn new(domain: Vec<VertexId>, boundary: Vec<VertexId>, values: Vec<f64>) -> Result<Self> {
        if values.len() != domain.len() * boundary.len() {
            return Err(Error::arg("harmonic measure has the wrong number of entries"));
        }
        Ok(Self { domain, boundary, values })
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.boundary.len() + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        let b = self.boundary.len();
        &self.values[row * b..(row + 1) * b]
    }

    /// Row index of a domain vertex.
    pub fn row_of(&self, v: VertexId) -> Option<usize> {
        self.domain.binary_search(&v).ok()
    }

    /// `Σ_z K(y,z) g(z)` on the domain, indexed by row.
    pub fn apply(&self, g: &[f64]) -> Vec<f64> {
        (0..self.domain.len())
            .map(|i| self.row(i).iter().zip(&self.boundary).map(|(k, &z)| k * g[z]).sum())
            .collect()
    }
}

/// Harmonic measure of `domain`, one solve per boundary vertex.
///
/// Rounding below zero is clipped, so every entry is nonnegative.
pub fn harmonic_measure<E: Executor>(
    space: &MetricMeasureGraph,
    domain: &[VertexId],
    config: &SolverConfig,
    exec: &E,
) -> Result<HarmonicMeasureMatrix> {
    let domain = check_domain(space, domain)?;
    let boundary = vertex_boundary(space, &domain);
    let problem = Dirichlet::new(space, &domain, config)?;
    let columns = exec.map(&boundary, |&z| problem.solve_with(|u| if u == z { 1.0 } else { 0.0 }).map(|s| s.x));
    let (n, b) = (domain.len(), boundary.len());
    let mut values = vec![0.0; n * b];
    for (j, col) in columns.into_iter().enumerate() {
        for (i, k) in col?.into_iter().enumerate() {
            values[i * b + j] = k.max(0.0);
        }
    }
    HarmonicMeasureMatrix::new(domain, boundary, values)
}

/// Where the sweeps obtain harmonic measures, so callers can cache them.
pub trait MeasureSource: Sync {
    fn harmonic_measure(&self, space: &MetricMeasureGraph, domain: &[VertexId], config: &SolverConfig) -> Result<HarmonicMeasureMatrix>;
}

/// Solves every column, distributing the solves through an executor.
#[derive(Debug, Clone, Copy)]
pub struct Solve<'a, E>(pub &'a E);

impl<E: Executor> MeasureSource for Solve<'_, E> {
    fn harmonic_measure(&self, space: &MetricMeasureGraph, domain: &[VertexId], config: &SolverConfig) -> Result<HarmonicMeasureMatrix> {
        harmonic_measure(space, domain, config, self.0)
    }
}

/// Exact Harnack constant of one ball.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HarnackReport {
    pub x: VertexId,
    pub r: f64,
    pub delta: f64,
    /// `max K(y,z)/K(y′,z)`; infinite when some column vanishes at `y′` only.
    #[cfg_attr(feature = "serde", serde(with = "crate::serde_f64"))]
    pub constant: f64,
    /// `(y, y′, z)` attaining the constant.
    pub witness: Option<(VertexId, VertexId, VertexId)>,
    pub domain_size: usize,
    pub boundary_size: usize,
    pub evaluation_size: usize,
}

/// `D = B(x,r)` and the evaluation set `{d(x,·) ≤ δr} ∩ D`.
pub fn harnack_sets(space: &MetricMeasureGraph, x: VertexId, r: f64, delta: f64) -> Result<(Vec<VertexId>, Vec<VertexId>)> {
    space.check_vertex(x)?;
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::arg(format!("delta must lie in (0, 1), got {delta}")));
    }
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::arg(format!("radius must be positive, got {r}")));
    }
    let dist = space.distances_from(x);
    let domain = crate::space::select(&dist, |d| d < r);
    let eval = crate::space::select(&dist, |d| d <= delta * r && d < r);
    Ok((domain, eval))
}

/// Harnack constant of `K` over the evaluation vertices.
pub fn harnack_from_measure(k: &HarmonicMeasureMatrix, evaluation: &[VertexId], x: VertexId, r: f64, delta: f64) -> Result<HarnackReport> {
    let rows: Vec<(VertexId, usize)> = evaluation
        .iter()
        .map(|&v| k.row_of(v).map(|i| (v, i)).ok_or_else(|| Error::arg(format!("vertex {v} is outside the domain"))))
        .collect::<Result<_>>()?;
    if rows.is_empty() {
        return Err(Error::arg("evaluation set is empty"));
    }
    let mut constant: f64 = 1.0;
    let mut witness = Some((rows[0].0, rows[0].0, k.boundary.first().copied().unwrap_or(x)));
    for (j, &z) in k.boundary.iter().enumerate() {
        let (mut hi, mut lo) = ((0.0, rows[0].0), (f64::INFINITY, rows[0].0));
        for &(v, i) in &rows {
            let val = k.get(i, j);
            if val > hi.0 {
                hi = (val, v);
            }
            if val < lo.0 {
                lo = (val, v);
            }
        }
        if hi.0 == 0.0 {
            continue;
        }
        let ratio = if lo.0 > 0.0 { hi.0 / lo.0 } else { f64::INFINITY };
        if ratio > constant {
            constant = ratio;
            witness = Some((hi.1, lo.1, z));
        }
    }
    Ok(HarnackReport {
        x,
        r,
        delta,
        constant,
        witness,
        domain_size: k.domain.len(),
        boundary_size: k.boundary.len(),
        evaluation_size: rows.len(),
    })
}

/// Best constant `C` with `sup h ≤ C inf h` on `{d(x,·) ≤ δr}` for every
/// nonnegative `h` harmonic in `B(x,r)`.
pub fn harnack_constant<E: Executor>(
    space: &MetricMeasureGraph,
    x: VertexId,
    r: f64,
    delta: f64,
    config: &SolverConfig,
    exec: &E,
) -> Result<HarnackReport> {
    let (domain, eval) = harnack_sets(space, x, r, delta)?;
    let k = harmonic_measure(space, &domain, config, exec)?;
    harnack_from_measure(&k, &eval, x, r, delta)
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EhiEntry {
    pub x: VertexId,
    pub r: f64,
    #[cfg_attr(feature = "serde", serde(with = "crate::serde_f64::option", default))]
    pub constant: Option<f64>,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub witness: Option<(VertexId, VertexId, VertexId)>,
    /// Set for remote sweeps.
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub remote: Option<bool>,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EhiReport {
    pub delta: f64,
    pub cap: f64,
    /// Largest constant among entries without errors.
    #[cfg_attr(feature = "serde", serde(with = "crate::serde_f64"))]
    pub max: f64,
    /// Every entry succeeded and `max ≤ cap`.
    pub pass: bool,
    pub entries: Vec<EhiEntry>,
}

impl EhiReport {
    fn assemble(delta: f64, cap: f64, entries: Vec<EhiEntry>) -> Self {
        let max = entries.iter().filter_map(|e| e.constant).fold(0.0, f64::max);
        let pass = max <= cap && entries.iter().all(|e| e.error.is_none());
        Self { delta, cap, max, pass, entries }
    }

    /// Constant at `(x, r)`.
    pub fn constant_at(&self, x: VertexId, r: f64) -> Option<f64> {
        self.entries.iter().find(|e| e.x == x && e.r == r).and_then(|e| e.constant)
    }
}

/// Settings shared by the Harnack sweeps.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EhiOptions {
    pub delta: f64,
    pub cap: f64,
    pub solver: SolverConfig,
}

impl Default for EhiOptions {
    fn default() -> Self {
        Self {
            delta: 0.5,
            cap: DEFAULT_HARNACK_CAP,
            solver: SolverConfig::default(),
        }
    }
}

fn sweep_entries<S: MeasureSource, E: Executor>(
    space: &MetricMeasureGraph,
    tuples: &[(VertexId, f64)],
    options: &EhiOptions,
    source: &S,
    exec: &E,
) -> Vec<EhiEntry> {
    let one = |x: VertexId, r: f64| -> Result<HarnackReport> {
        let (domain, eval) = harnack_sets(space, x, r, options.delta)?;
        let k = source.harmonic_measure(space, &domain, &options.solver)?;
        harnack_from_measure(&k, &eval, x, r, options.delta)
    };
    exec.map(tuples, |&(x, r)| match one(x, r) {
        Ok(rep) => EhiEntry {
            x,
            r,
            constant: Some(rep.constant),
            witness: rep.witness,
            remote: None,
            error: None,
        },
        Err(e) => EhiEntry {
            x,
            r,
            constant: None,
            witness: None,
            remote: None,
            error: Some(e.to_string()),
        },
    })
}

fn tuples(centers: &[VertexId], radii: &[f64]) -> Vec<(VertexId, f64)> {
    centers.iter().flat_map(|&x| radii.iter().map(move |&r| (x, r))).collect()
}

/// Harnack constants over every `(x, r)`, centers outermost.
pub fn ehi_sweep<E: Executor>(space: &MetricMeasureGraph, centers: &[VertexId], radii: &[f64], options: &EhiOptions, exec: &E) -> EhiReport {
    ehi_sweep_with(space, centers, radii, options, &Solve(exec), exec)
}

/// [`ehi_sweep`] drawing harmonic measures from `source`.
pub fn ehi_sweep_with<S: MeasureSource, E: Executor>(
    space: &MetricMeasureGraph,
    centers: &[VertexId],
    radii: &[f64],
    options: &EhiOptions,
    source: &S,
    exec: &E,
) -> EhiReport {
    EhiReport::assemble(options.delta, options.cap, sweep_entries(space, &tuples(centers, radii), options, source, exec))
}

/// Balls `B(x,r)` with `r ≥ ½ ε d(o,x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RemoteBallSpec {
    pub origin: VertexId,
    pub epsilon: f64,
}

impl RemoteBallSpec {
    pub fn new(origin: VertexId, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(Error::arg(format!("remoteness must lie in (0, 1], got {epsilon}")));
        }
        Ok(Self { origin, epsilon })
    }

    /// Predicate given `d(o,x)`.
    pub fn is_remote(&self, distance_to_origin: f64, r: f64) -> bool {
        r >= 0.5 * self.epsilon * distance_to_origin
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RemoteEhiReport {
    pub spec: RemoteBallSpec,
    pub sweep: EhiReport,
    /// Largest constant over remote balls; `None` when there are none.
    #[cfg_attr(feature = "serde", serde(with = "crate::serde_f64::option", default))]
    pub remote_max: Option<f64>,
    #[cfg_attr(feature = "serde", serde(with = "crate::serde_f64::option", default))]
    pub non_remote_max: Option<f64>,
    /// Remote balls all succeeded within the cap.
    pub pass: bool,
}

/// [`ehi_sweep`] with every entry classified by the remote predicate.
pub fn remote_ehi_sweep<E: Executor>(
    space: &MetricMeasureGraph,
    spec: RemoteBallSpec,
    centers: &[VertexId],
    radii: &[f64],
    options: &EhiOptions,
    exec: &E,
) -> Result<RemoteEhiReport> {
    remote_ehi_sweep_with(space, spec, centers, radii, options, &Solve(exec), exec)
}

/// [`remote_ehi_sweep`] drawing harmonic measures from `source`.
pub fn remote_ehi_sweep_with<S: MeasureSource, E: Executor>(
    space: &MetricMeasureGraph,
    spec: RemoteBallSpec,
    centers: &[VertexId],
    radii: &[f64],
    options: &EhiOptions,
    source: &S,
    exec: &E,
) -> Result<RemoteEhiReport> {
    let spec = RemoteBallSpec::new(spec.origin, spec.epsilon)?;
    space.check_vertex(spec.origin)?;
    let dist = space.distances_from(spec.origin);
    let mut entries = sweep_entries(space, &tuples(centers, radii), options, source, exec);
    let (mut remote_max, mut non_remote_max) = (None::<f64>, None::<f64>);
    let mut pass = true;
    for e in &mut entries {
        let remote = spec.is_remote(dist[e.x], e.r);
        e.remote = Some(remote);
        let slot = if remote { &mut remote_max } else { &mut non_remote_max };
        if let Some(c) = e.constant {
            *slot = Some(slot.map_or(c, |m| m.max(c)));
        }
        if remote {
            pass &= e.constant.is_some_and(|c| c <= options.cap);
        }
    }
    Ok(RemoteEhiReport {
        spec,
        sweep: EhiReport::assemble(options.delta, options.cap, entries),
        remote_max,
        non_remote_max,
        pass,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum StabilityVerdict {
    /// Both sweeps bounded by the cap.
    Stable,
    /// Base bounded; weighted exceeds the cap or grows along the radii.
    Destabilized,
    Other,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PairedConstant {
    pub x: VertexId,
    pub r: f64,
    #[cfg_attr(feature = "serde", serde(with = "crate::serde_f64::option", default))]
    pub base: Option<f64>,
    #[cfg_attr(feature = "serde", serde(with = "crate::serde_f64::option", default))]
    pub weighted: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StabilityReport {
    pub weight: WeightSpec,
    pub counterexample: bool,
    pub admissibility: AdmissibilityReport,
    pub base: EhiReport,
    pub weighted: EhiReport,
    pub paired: Vec<PairedConstant>,
    /// For every center, the weighted constants strictly increase along the
    /// ascending radii and the last is at least twice the first.
    pub growing: bool,
    pub verdict: StabilityVerdict,
    pub warnings: Vec<String>,
}

/// Pairs drawn for the admissibility check of the weight.
pub const ADMISSIBILITY_PAIRS: usize = 200;

/// Harnack constants before and after a radial reweighting.
///
/// The weight must pass the admissibility check at `options.cap` unless the
/// run is flagged as a counterexample. Radii are sorted for the growth test.
pub fn ehi_stability_experiment<E: Executor>(
    space: &MetricMeasureGraph,
    weight: &WeightSpec,
    centers: &[VertexId],
    radii: &[f64],
    options: &EhiOptions,
    counterexample: bool,
    seed: u64,
    exec: &E,
) -> Result<StabilityReport> {
    ehi_stability_experiment_with(space, weight, centers, radii, options, counterexample, seed, &Solve(exec), exec)
}

/// [`ehi_stability_experiment`] drawing harmonic measures from `source`.
pub fn ehi_stability_experiment_with<S: MeasureSource, E: Executor>(
    space: &MetricMeasureGraph,
    weight: &WeightSpec,
    centers: &[VertexId],
    radii: &[f64],
    options: &EhiOptions,
    counterexample: bool,
    seed: u64,
    source: &S,
    exec: &E,
) -> Result<StabilityReport> {
    let values = weight.values(space)?;
    let all: Vec<VertexId> = (0..space.len()).collect();
    let pairs = sample::region_pairs(&all, ADMISSIBILITY_PAIRS, seed);
    let admissibility = weight_admissibility_check(space, weight.origin, &values, Some(weight.alpha), &pairs, options.cap)?;
    let mut warnings = Vec::new();
    if !admissibility.pass {
        if !counterexample {
            return Err(Error::arg(format!(
                "weight is not admissible (constant {} exceeds {}); flag the run as a counterexample",
                admissibility.c, options.cap
            )));
        }
        warnings.push("weight is not admissible; counterexample run".to_string());
    }
    let weighted_space = apply_weight(space, weight)?;
    let mut radii = radii.to_vec();
    radii.sort_by(f64::total_cmp);
    let base = ehi_sweep_with(space, centers, &radii, options, source, exec);
    let weighted = ehi_sweep_with(&weighted_space, centers, &radii, options, source, exec);
    let paired: Vec<PairedConstant> = base
        .entries
        .iter()
        .zip(&weighted.entries)
        .map(|(b, w)| PairedConstant {
            x: b.x,
            r: b.r,
            base: b.constant,
            weighted: w.constant,
        })
        .collect();
    let growing = radii.len() >= 2
        && !centers.is_empty()
        && paired.chunks(radii.len()).all(|row| {
            let c: Option<Vec<f64>> = row.iter().map(|p| p.weighted).collect();
            c.is_some_and(|c| c.windows(2).all(|w| w[1] > w[0]) && c[c.len() - 1] >= 2.0 * c[0])
        });
    if counterexample && !growing {
        warnings.push("weighted constants do not grow along the radii".to_string());
    }
    let verdict = if base.pass && weighted.pass && !(counterexample && growing) {
        StabilityVerdict::Stable
    } else if base.pass && (!weighted.pass || growing) {
        StabilityVerdict::Destabilized
    } else {
        StabilityVerdict::Other
    };
    Ok(StabilityReport {
        weight: *weight,
        counterexample,
        admissibility,
        base,
        weighted,
        paired,
        growing,
        verdict,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Sequential;
    use crate::generators::{generate, GeneratorSpec, WeightForm};

    fn cfg() -> SolverConfig {
        SolverConfig::default()
    }

    #[test]
    fn linear_extension_on_path() {
        let p = generate(&GeneratorSpec::path(8)).unwrap();
        let mut g = vec![0.0; 9];
        g[8] = 1.0;
        let domain: Vec<_> = (1..8).collect();
        let h = harmonic_extension(&p, &domain, &g, &cfg()).unwrap();
        for (v, hv) in h.iter().enumerate() {
            assert!((hv - v as f64 / 8.0).abs() < 1e-14);
        }
        let h = harmonic_extension(&p, &domain, &[2.5; 9], &cfg()).unwrap();
        assert!(h.iter().all(|&x| (x - 2.5).abs() < 1e-14));
    }

    #[test]
    fn extension_needs_a_boundary() {
        let p = generate(&GeneratorSpec::path(3)).unwrap();
        let all: Vec<_> = (0..4).collect();
        assert!(harmonic_extension(&p, &all, &[0.0; 4], &cfg()).is_err());
    }

    #[test]
    fn harmonic_measure_closed_form() {
        let p = generate(&GeneratorSpec::path(4)).unwrap();
        let k = harmonic_measure(&p, &[1, 2, 3], &cfg(), &Sequential).unwrap();
        assert_eq!(k.boundary, vec![0, 4]);
        assert!((k.get(1, 1) - 0.5).abs() < 1e-15);
        assert!((k.get(2, 1) - 0.75).abs() < 1e-15);
        let single = harmonic_measure(&p, &[2], &cfg(), &Sequential).unwrap();
        assert!(single.values.iter().all(|k| (k - 0.5).abs() < 1e-15), "{:?}", single.values);
    }

    #[test]
    fn path_harnack_is_three() {
        let p = generate(&GeneratorSpec::path(40)).unwrap();
        for r in [2.0, 4.0, 8.0, 16.0] {
            let rep = harnack_constant(&p, 20, r, 0.5, &cfg(), &Sequential).unwrap();
            assert!((rep.constant - 3.0).abs() < 1e-9, "r = {r}: {}", rep.constant);
            let (y, y2, z) = rep.witness.unwrap();
            assert_eq!((y as f64 - 20.0).abs(), r / 2.0);
            assert_eq!((y2 as f64 - 20.0).abs(), r / 2.0);
            assert_eq!((z as f64 - 20.0).abs(), r);
        }
        let tiny = harnack_constant(&p, 20, 4.0, 0.2, &cfg(), &Sequential).unwrap();
        assert_eq!(tiny.constant, 1.0);
    }

    #[test]
    fn remote_predicate() {
        let s = RemoteBallSpec::new(0, 1.0).unwrap();
        assert!(s.is_remote(10.0, 5.0));
        assert!(!s.is_remote(10.0, 4.9));
        assert!(RemoteBallSpec::new(0, 0.0).is_err());
    }

    #[test]
    fn zero_exponent_weight_pairs_agree() {
        let p = generate(&GeneratorSpec::path(60)).unwrap();
        let w = WeightSpec {
            origin: 30,
            alpha: 0.0,
            form: WeightForm::Bracket,
        };
        let rep = ehi_stability_experiment(&p, &w, &[30], &[4.0, 8.0], &EhiOptions::default(), false, 1, &Sequential).unwrap();
        for pair in &rep.paired {
            assert_eq!(pair.base, pair.weighted);
        }
        assert_eq!(rep.verdict, StabilityVerdict::Stable);
    }

    #[test]
    fn weighted_line_destabilizes() {
        let p = generate(&GeneratorSpec::path(80)).unwrap();
        let w = WeightSpec {
            origin: 40,
            alpha: 2.0,
            form: WeightForm::Bracket,
        };
        let rep =
            ehi_stability_experiment(&p, &w, &[40], &[8.0, 16.0, 32.0], &EhiOptions::default(), true, 1, &Sequential).unwrap();
        assert!(rep.growing, "{:?}", rep.paired);
        assert_eq!(rep.verdict, StabilityVerdict::Destabilized);
    }
}
