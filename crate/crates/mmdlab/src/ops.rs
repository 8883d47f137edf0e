//! Executes one configured operation against a space.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use mmdlab_core::connectivity::{
    annulus_chain_connected, annulus_path_connected, ball_chain_connected, build_partition_of_unity, chain_bound_ratio,
    chain_count, minimal_annulus_constant, rca_check, refine_chain, two_point_check, Connectivity,
};
use mmdlab_core::estimators::{cap_upper_constant, capacity_chaining_check, fvg_check, pi_sweep, rvd_check, vd_constant};
use mmdlab_core::generators::{apply_weight, generate, glue_at_point, refinement_map};
use mmdlab_core::harmonic::{
    ehi_stability_experiment_with, ehi_sweep_with, remote_ehi_sweep_with, EhiOptions, HarmonicMeasureMatrix,
    MeasureSource, Solve, StabilityVerdict,
};
use mmdlab_core::linalg::SolverConfig;
use mmdlab_core::sample::{pairs_at_distance, region_pairs, sample_interior};
use mmdlab_core::space::Neighborhood;
use mmdlab_core::{Error, Executor, MetricMeasureGraph, ScalingFunction, VertexId};
use serde::Serialize;
use serde_json::{json, Value};

use crate::cache::DiskCache;
use crate::config::*;
use crate::error::{LabError, LabResult};
use crate::mmg;

/// Shared state of a run.
pub struct Context<'a, E: Executor> {
    pub exec: &'a E,
    pub cache: Option<&'a DiskCache<'a, E>>,
    pub seed: u64,
    /// Fallback for operations without their own `psi`.
    pub psi: Option<ScalingFunction>,
    /// Relative paths resolve against this directory.
    pub base_dir: PathBuf,
}

impl<'a, E: Executor> Context<'a, E> {
    pub fn new(exec: &'a E) -> Self {
        Self {
            exec,
            cache: None,
            seed: 0,
            psi: None,
            base_dir: PathBuf::from("."),
        }
    }

    fn source(&self) -> Source<'_, 'a, E> {
        match self.cache {
            Some(c) => Source::Cache(c),
            None => Source::Solve(Solve(self.exec)),
        }
    }

    fn psi(&self, own: &Option<ScalingFunction>) -> LabResult<ScalingFunction> {
        let psi = own
            .clone()
            .or_else(|| self.psi.clone())
            .ok_or_else(|| LabError::config("/psi", "a scaling function is required"))?;
        psi.check()?;
        Ok(psi)
    }

    fn centers(&self, space: &MetricMeasureGraph, centers: &Centers, margin: f64) -> LabResult<Vec<VertexId>> {
        match centers {
            Centers::Ids(ids) => {
                for &v in ids {
                    space.check_vertex(v)?;
                }
                Ok(ids.clone())
            }
            Centers::InteriorSample(n) => Ok(sample_interior(space, *n, margin, self.seed)?),
        }
    }

    fn path(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }
}

enum Source<'s, 'a, E: Executor> {
    Cache(&'s DiskCache<'a, E>),
    Solve(Solve<'a, E>),
}

impl<E: Executor> MeasureSource for Source<'_, '_, E> {
    fn harmonic_measure(
        &self,
        space: &MetricMeasureGraph,
        domain: &[VertexId],
        config: &SolverConfig,
    ) -> mmdlab_core::Result<HarmonicMeasureMatrix> {
        match self {
            Source::Cache(c) => c.harmonic_measure(space, domain, config),
            Source::Solve(s) => s.harmonic_measure(space, domain, config),
        }
    }
}

/// Builds the space described by `source`.
pub fn load_space(source: &SpaceSource, base_dir: &Path) -> LabResult<MetricMeasureGraph> {
    let mut space = match (&source.generate, &source.file) {
        (Some(spec), None) => generate(spec)?,
        (None, Some(file)) => {
            let path = if file.is_absolute() { file.clone() } else { base_dir.join(file) };
            mmg::read(&path)?
        }
        _ => return Err(LabError::config("/space", "give exactly one of `generate` and `file`")),
    };
    if let Some(g) = source.glue {
        space = glue_at_point(&space, &space, g.a, g.b)?;
    }
    if let Some(w) = &source.weight {
        space = apply_weight(&space, w)?;
    }
    Ok(space)
}

/// Report of one operation; `pass` is `None` for purely informational runs.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub report: Value,
    pub pass: Option<bool>,
}

fn to_json<T: Serialize>(x: &T) -> LabResult<Value> {
    serde_json::to_value(x).map_err(|e| LabError::Internal(e.to_string()))
}

fn outcome<T: Serialize>(report: &T, pass: bool) -> LabResult<Outcome> {
    Ok(Outcome {
        report: to_json(report)?,
        pass: Some(pass),
    })
}

fn max_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(0.0, f64::max)
}

/// `(r, R)` pairs from explicit pairs or every `r < R` among `radii`.
fn scale_pairs(pairs: &Option<Vec<(f64, f64)>>, radii: &Option<Vec<f64>>) -> LabResult<Vec<(f64, f64)>> {
    match (pairs, radii) {
        (Some(p), None) => Ok(p.clone()),
        (None, Some(r)) => {
            let mut r = r.clone();
            r.sort_by(f64::total_cmp);
            r.dedup();
            Ok(r.iter().enumerate().flat_map(|(i, &a)| r[i + 1..].iter().map(move |&b| (a, b))).collect())
        }
        _ => Err(LabError::config("/scale_pairs", "give exactly one of `scale_pairs` and `radii`")),
    }
}

pub fn run_operation<E: Executor>(space: &MetricMeasureGraph, op: &Operation, ctx: &Context<'_, E>) -> LabResult<Outcome> {
    let exec = ctx.exec;
    match op {
        Operation::Vd(c) => {
            let centers = ctx.centers(space, &c.centers, c.margin.unwrap_or(2.0 * max_of(&c.radii)))?;
            let rep = vd_constant(space, &centers, &c.radii, c.cap, exec)?;
            outcome(&rep, rep.pass)
        }
        Operation::Pi(c) => {
            let psi = ctx.psi(&c.psi)?;
            let a = c.a.to_vec();
            let centers = ctx.centers(space, &c.centers, c.margin.unwrap_or(max_of(&a) * max_of(&c.radii)))?;
            let rep = pi_sweep(space, &psi, &centers, &c.radii, &a, c.cap, &c.solver, exec)?;
            outcome(&rep, rep.pass)
        }
        Operation::Cap(c) => {
            let psi = ctx.psi(&c.psi)?;
            let centers = ctx.centers(space, &c.centers, c.margin.unwrap_or(c.a1 * max_of(&c.radii)))?;
            let rep = cap_upper_constant(space, &psi, c.a1, &centers, &c.radii, c.cap, &c.solver, exec)?;
            outcome(&rep, rep.pass)
        }
        Operation::Fvg(c) => {
            let psi = ctx.psi(&c.psi)?;
            let pairs = scale_pairs(&c.scale_pairs, &c.radii)?;
            let big = pairs.iter().map(|p| p.1).fold(0.0, f64::max);
            let centers = ctx.centers(space, &c.centers, c.margin.unwrap_or(big))?;
            let rep = fvg_check(space, &psi, &centers, &pairs, c.cap, exec)?;
            outcome(&rep, rep.pass)
        }
        Operation::Rvd(c) => {
            let pairs = scale_pairs(&c.scale_pairs, &c.radii)?;
            let big = pairs.iter().map(|p| p.1).fold(0.0, f64::max);
            let centers = ctx.centers(space, &c.centers, c.margin.unwrap_or(big))?;
            let rep = rvd_check(space, &centers, &pairs, c.alpha, c.cap, exec)?;
            outcome(&rep, rep.pass)
        }
        Operation::Chaining(c) => {
            let runs = c
                .k
                .to_vec()
                .into_iter()
                .map(|k| capacity_chaining_check(space, c.x, c.big_r, c.a1, k, &c.solver))
                .collect::<Result<Vec<_>, _>>()?;
            let pass = runs.iter().all(|r| r.holds);
            outcome(&json!({ "pass": pass, "runs": to_json(&runs)? }), pass)
        }
        Operation::Chain(c) => {
            let rep = chain_count(space, c.x, c.y, &c.container, c.epsilon)?;
            let found = rep.length().is_some();
            let mut v = to_json(&rep)?;
            v["n"] = json!(rep.length());
            Ok(Outcome { report: v, pass: Some(found) })
        }
        Operation::Ball(c) => {
            let centers = ctx.centers(space, &c.centers, c.margin.unwrap_or(c.a * max_of(&c.radii)))?;
            let mut reports = Vec::new();
            for &x in &centers {
                for &r in &c.radii {
                    reports.push(ball_chain_connected(space, x, r, c.a, &c.epsilons, exec)?);
                }
            }
            let pass = reports.iter().all(|r| r.pass);
            outcome(&json!({ "pass": pass, "reports": to_json(&reports)? }), pass)
        }
        Operation::Annulus(c) => {
            let centers = ctx.centers(space, &c.centers, c.margin.unwrap_or(c.c * max_of(&c.radii)))?;
            let mut reports = Vec::new();
            for &x in &centers {
                for &r in &c.radii {
                    reports.push(annulus_chain_connected(space, x, r, c.c, c.epsilon, exec)?);
                }
            }
            let pass = reports.iter().all(|r| r.pass);
            outcome(&json!({ "pass": pass, "reports": to_json(&reports)? }), pass)
        }
        Operation::AnnulusPath(c) => {
            let c0s = c.c0.to_vec();
            let centers = ctx.centers(space, &c.centers, c.margin.unwrap_or(max_of(&c0s) * max_of(&c.radii)))?;
            let tuples: Vec<(f64, VertexId, f64)> = c0s
                .iter()
                .flat_map(|&c0| centers.iter().flat_map(move |&x| c.radii.iter().map(move |&r| (c0, x, r))))
                .collect();
            let entries = exec
                .map(&tuples, |&(c0, x, r)| annulus_path_connected(space, x, r, c0))
                .into_iter()
                .collect::<Result<Vec<_>, _>>()?;
            let pass = entries.iter().all(|e| e.status != Connectivity::Fail);
            let min_components = entries.iter().filter(|e| e.status == Connectivity::Fail).map(|e| e.components).min();
            outcome(
                &json!({
                    "check": "annulus_path",
                    "pass": pass,
                    "failures": entries.iter().filter(|e| e.status == Connectivity::Fail).count(),
                    "min_failure_components": min_components,
                    "entries": to_json(&entries)?,
                }),
                pass,
            )
        }
        Operation::MinimalC0(c) => {
            let centers = ctx.centers(space, &c.centers, c.margin.unwrap_or(max_of(&c.grid) * max_of(&c.radii)))?;
            let rep = minimal_annulus_constant(space, &centers, &c.radii, &c.grid, exec)?;
            let uniform = rep.per_radius.windows(2).all(|w| w[0].1 == w[1].1);
            let pass = rep.c0.is_some() && (uniform || !c.require_uniform);
            let mut v = to_json(&rep)?;
            v["uniform"] = json!(uniform);
            v["pass"] = json!(pass);
            Ok(Outcome { report: v, pass: Some(pass) })
        }
        Operation::ChainBound(c) => chain_bound(space, c, ctx),
        Operation::Rca(c) => {
            let rep = rca_check(space, c.origin, c.a, &c.radii)?;
            outcome(&rep, rep.pass)
        }
        Operation::Pou(c) => partition(space, c, ctx),
        Operation::TwoPoint(c) => {
            let psi = ctx.psi(&c.psi)?;
            let u = match &c.u {
                FunctionSpec::Distance { origin } => {
                    space.check_vertex(*origin)?;
                    space.distances_from(*origin)
                }
                FunctionSpec::Values { values } => values.clone(),
            };
            let pairs = match &c.pairs {
                Some(p) => p.clone(),
                None => {
                    space.check_vertex(c.x0)?;
                    let ball = space.ball(c.x0, c.big_r / c.c_p)?;
                    region_pairs(&ball, c.max_pairs, ctx.seed)
                }
            };
            let rep = two_point_check(space, &u, c.x0, c.big_r, &pairs, &psi, c.c_p)?;
            outcome(&rep, rep.pass)
        }
        Operation::Refine(c) => refine(c, ctx),
        Operation::Harnack(c) => harnack(space, c, ctx),
    }
}

fn chain_bound<E: Executor>(space: &MetricMeasureGraph, c: &ChainBoundConfig, ctx: &Context<'_, E>) -> LabResult<Outcome> {
    let psi = ctx.psi(&c.psi)?;
    // Cell label of each pair: the sampled distance, or the realized one.
    let (pairs, labels): (Vec<(VertexId, VertexId)>, Vec<f64>) = match &c.pairs {
        PairsSpec::Explicit(p) => {
            let mut labels = Vec::with_capacity(p.len());
            for &(x, y) in p {
                space.check_vertex(x)?;
                space.check_vertex(y)?;
                labels.push(space.distance(x, y));
            }
            (p.clone(), labels)
        }
        PairsSpec::AtDistance(s) => {
            let sources = ctx.centers(space, &s.sources, s.margin.unwrap_or(0.0))?;
            let mut all = Vec::new();
            let mut labels = Vec::new();
            for (i, &d) in s.distances.iter().enumerate() {
                let p = pairs_at_distance(space, &sources, d, s.count, ctx.seed.wrapping_add(i as u64))?;
                labels.extend(std::iter::repeat_n(d, p.len()));
                all.extend(p);
            }
            (all, labels)
        }
    };
    let rep = chain_bound_ratio(space, &pairs, &c.epsilons, c.a0, &psi, ctx.exec)?;
    let mut cells: BTreeMap<(u64, u64), (f64, f64, f64, usize)> = BTreeMap::new();
    for (i, e) in rep.entries.iter().enumerate() {
        let d = labels[i / c.epsilons.len()];
        let cell = cells.entry((e.epsilon.to_bits(), d.to_bits())).or_insert((e.epsilon, d, 0.0, 0));
        cell.2 = cell.2.max(e.ratio);
        cell.3 += 1;
    }
    let mut cells: Vec<_> = cells.into_values().collect();
    cells.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let sups: Vec<f64> = cells.iter().map(|c| c.2).collect();
    let lo = sups.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = sups.iter().copied().fold(0.0, f64::max);
    let spread = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    let pass = rep.all_finite && c.max_spread.is_none_or(|m| spread <= m);
    let cells: Vec<Value> = cells
        .iter()
        .map(|&(epsilon, d, sup, n)| json!({ "epsilon": epsilon, "d": d, "supremum": finite_or_text(sup), "pairs": n }))
        .collect();
    let mut v = to_json(&rep)?;
    v["cells"] = json!(cells);
    v["spread"] = finite_or_text(spread);
    v["max_spread"] = json!(c.max_spread);
    v["pass"] = json!(pass);
    Ok(Outcome { report: v, pass: Some(pass) })
}

/// JSON has no infinities; they travel as the strings used by the core
/// crate's serializers.
pub fn finite_or_text(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else if x.is_nan() {
        json!("nan")
    } else if x > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

fn partition<E: Executor>(space: &MetricMeasureGraph, c: &PouConfig, ctx: &Context<'_, E>) -> LabResult<Outcome> {
    let psi = ctx.psi(&c.psi)?;
    let region = c.region.resolve(space)?;
    let mut runs = Vec::new();
    let mut constants = Vec::new();
    let mut all_ok = true;
    let mut near = Neighborhood::new(space);
    let mut ball = Vec::new();
    for eps in c.epsilon.to_vec() {
        let p = build_partition_of_unity(space, &region, eps, &psi)?;
        let mut covered = vec![true; space.len()];
        for &v in &p.uncovered {
            covered[v] = false;
        }
        let sum_error = p
            .sum(space.len())
            .iter()
            .zip(&covered)
            .filter(|(_, c)| **c)
            .map(|(s, _)| (s - 1.0).abs())
            .fold(0.0, f64::max);
        let mut in_range = true;
        let mut support_inside = true;
        let mut core_one = true;
        let mut core_exclusive = true;
        let mut support_radius: f64 = 0.0;
        let mut core_owner = vec![usize::MAX; space.len()];
        for (i, &z) in p.net.iter().enumerate() {
            near.within(z, 1.25 * eps, &mut ball);
            let dist: BTreeMap<VertexId, f64> = ball.iter().copied().collect();
            for &(v, x) in &p.functions[i] {
                in_range &= (0.0..=1.0).contains(&x);
                match dist.get(&v) {
                    Some(&d) => support_radius = support_radius.max(d),
                    None => support_inside = false,
                }
            }
            for &(v, d) in &ball {
                if d < 0.25 * eps {
                    core_one &= p.value(i, v) == 1.0;
                    core_owner[v] = i;
                }
            }
        }
        for (i, f) in p.functions.iter().enumerate() {
            for &(v, x) in f {
                if core_owner[v] != usize::MAX && core_owner[v] != i && x != 0.0 {
                    core_exclusive = false;
                }
            }
        }
        let ok = sum_error <= 1e-12 && in_range && support_inside && core_one && core_exclusive && p.constant.is_finite();
        all_ok &= ok;
        constants.push(p.constant);
        let mut v = json!({
            "epsilon": eps,
            "net": p.net,
            "uncovered": p.uncovered,
            "energies": p.energies,
            "ball_measures": p.ball_measures,
            "constant": finite_or_text(p.constant),
            "sum_error": sum_error,
            "values_in_unit_interval": in_range,
            "support_radius": support_radius,
            "support_inside": support_inside,
            "core_identically_one": core_one,
            "core_exclusive": core_exclusive,
            "pass": ok,
        });
        if c.include_functions {
            v["functions"] = to_json(&p.functions)?;
        }
        runs.push(v);
    }
    let lo = constants.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = constants.iter().copied().fold(0.0, f64::max);
    let ratio = if lo > 0.0 { hi / lo } else if hi == 0.0 { 1.0 } else { f64::INFINITY };
    let pass = all_ok && c.max_ratio.is_none_or(|m| ratio <= m);
    outcome(
        &json!({ "pass": pass, "constant_ratio": finite_or_text(ratio), "max_ratio": c.max_ratio, "runs": runs }),
        pass,
    )
}

fn refine<E: Executor>(c: &RefineConfig, ctx: &Context<'_, E>) -> LabResult<Outcome> {
    if c.levels.is_empty() {
        return Err(LabError::config("/levels", "at least one level is required"));
    }
    let levels = c
        .levels
        .iter()
        .map(|s| load_space(s, &ctx.base_dir))
        .collect::<LabResult<Vec<_>>>()?;
    let maps = match &c.maps {
        Some(file) => {
            let path = ctx.path(file);
            let text = std::fs::read_to_string(&path).map_err(|e| LabError::io(&path, e))?;
            let sizes: Vec<usize> = levels.iter().map(|l| l.len()).collect();
            mmg::parse_maps(&text, &path.display().to_string(), &sizes)?
        }
        None => levels
            .windows(2)
            .map(|w| refinement_map(&w[0], &w[1], 1e-9))
            .collect::<Result<Vec<_>, _>>()?,
    };
    match refine_chain(&levels, &maps, c.x, c.y, c.epsilon_ratio, c.a0, c.tol) {
        Ok(r) => {
            let mut v = to_json(&r)?;
            let cells: Vec<usize> = r.chains.iter().map(Vec::len).collect();
            if let Some(obj) = v.as_object_mut() {
                obj.remove("chains");
            }
            v["cells"] = json!(cells);
            v["levels_completed"] = json!(levels.len());
            v["pass"] = json!(r.holds);
            Ok(Outcome {
                report: v,
                pass: Some(r.holds),
            })
        }
        Err(Error::Refinement { level, hop, reason }) => outcome(
            &json!({
                "pass": false,
                "holds": false,
                "levels_completed": level - 1,
                "failure": { "level": level, "hop": hop, "reason": reason },
            }),
            false,
        ),
        Err(e) => Err(e.into()),
    }
}

fn harnack<E: Executor>(space: &MetricMeasureGraph, c: &HarnackConfig, ctx: &Context<'_, E>) -> LabResult<Outcome> {
    let centers = ctx.centers(space, &c.centers, c.margin.unwrap_or(max_of(&c.radii)))?;
    let options = EhiOptions {
        delta: c.delta,
        cap: c.cap,
        solver: c.solver,
    };
    let source = ctx.source();
    if let Some(w) = &c.weight {
        let rep = ehi_stability_experiment_with(space, w, &centers, &c.radii, &options, c.counterexample, ctx.seed, &source, ctx.exec)?;
        let expected = if c.counterexample {
            StabilityVerdict::Destabilized
        } else {
            StabilityVerdict::Stable
        };
        let mut v = to_json(&rep)?;
        v["expected_verdict"] = to_json(&expected)?;
        return Ok(Outcome {
            report: v,
            pass: Some(rep.verdict == expected),
        });
    }
    if let Some(spec) = c.remote {
        let rep = remote_ehi_sweep_with(space, spec, &centers, &c.radii, &options, &source, ctx.exec)?;
        return outcome(&rep, rep.pass);
    }
    let rep = ehi_sweep_with(space, &centers, &c.radii, &options, &source, ctx.exec);
    outcome(&rep, rep.pass)
}
