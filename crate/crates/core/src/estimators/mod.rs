//! Constants of the standard hypotheses: volume doubling, Poincaré
//! inequality, capacity upper bound, fast volume growth and reverse doubling,
//! plus the series chaining bound for capacities of nested balls.
//!
//! Every sweep evaluates a ratio on a list of `(x, r[, R])` tuples and reports
//! its maximum. Work is distributed per center through an [`Executor`];
//! reductions run in tuple order.

mod capacity;
mod poincare;

pub use capacity::{ball_capacity, capacity, CapacityResult};
pub use poincare::{poincare_constant, poincare_on, PoincareResult};

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::linalg::SolverConfig;
use crate::math;
use crate::scaling::ScalingFunction;
use crate::space::{MetricMeasureGraph, VertexId};

/// Default pass threshold for estimated constants.
pub const DEFAULT_CAP: f64 = 1e4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Condition {
    #[cfg_attr(feature = "serde", serde(rename = "VD"))]
    VolumeDoubling,
    #[cfg_attr(feature = "serde", serde(rename = "PI"))]
    Poincare,
    #[cfg_attr(feature = "serde", serde(rename = "CAP_UPPER"))]
    CapacityUpper,
    #[cfg_attr(feature = "serde", serde(rename = "FVG"))]
    FastVolumeGrowth,
    #[cfg_attr(feature = "serde", serde(rename = "RVD"))]
    ReverseDoubling,
}

/// One evaluated tuple.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScaleEntry {
    pub x: VertexId,
    pub r: f64,
    #[cfg_attr(feature = "serde", serde(rename = "R", default, skip_serializing_if = "Option::is_none"))]
    pub big_r: Option<f64>,
    /// The defining ratio; `None` for a skipped tuple.
    #[cfg_attr(feature = "serde", serde(with = "crate::serde_f64::option", default))]
    pub value: Option<f64>,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub note: Option<String>,
}

/// Tuple attaining the reported constant.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Witness {
    pub x: VertexId,
    pub r: f64,
    #[cfg_attr(feature = "serde", serde(rename = "R", default, skip_serializing_if = "Option::is_none"))]
    pub big_r: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConditionReport {
    pub condition: Condition,
    /// Maximum of the defining ratio over all evaluated tuples.
    #[cfg_attr(feature = "serde", serde(with = "crate::serde_f64"))]
    pub constant: f64,
    /// `A` for PI, `A₁` for the capacity bound.
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub enlargement: Option<f64>,
    /// `α` for reverse doubling.
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub exponent: Option<f64>,
    pub scale_range: (f64, f64),
    pub witnesses: Vec<Witness>,
    pub pass: bool,
    pub cap: f64,
    pub entries: Vec<ScaleEntry>,
    pub warnings: Vec<String>,
}

impl ConditionReport {
    fn assemble(condition: Condition, entries: Vec<ScaleEntry>, cap: f64) -> Result<Self> {
        let mut constant = f64::NEG_INFINITY;
        for e in &entries {
            if let Some(v) = e.value {
                if v > constant || (v.is_nan() && !constant.is_nan()) {
                    constant = v;
                }
            }
        }
        if constant == f64::NEG_INFINITY {
            return Err(Error::arg(format!("{condition:?}: no tuple could be evaluated")));
        }
        let witnesses = entries
            .iter()
            .filter(|e| e.value == Some(constant))
            .map(|e| Witness { x: e.x, r: e.r, big_r: e.big_r })
            .collect();
        let lo = entries.iter().map(|e| e.r).fold(f64::INFINITY, f64::min);
        let hi = entries.iter().map(|e| e.big_r.unwrap_or(e.r)).fold(0.0, f64::max);
        let warnings = entries
            .iter()
            .filter_map(|e| e.note.as_ref().map(|n| format!("x={} r={}: {n}", e.x, e.r)))
            .collect();
        Ok(Self {
            condition,
            constant,
            enlargement: None,
            exponent: None,
            scale_range: (lo, hi),
            witnesses,
            pass: constant <= cap,
            cap,
            entries,
            warnings,
        })
    }
}

fn check_centers(space: &MetricMeasureGraph, centers: &[VertexId]) -> Result<()> {
    if centers.is_empty() {
        return Err(Error::arg("no centers given"));
    }
    centers.iter().try_for_each(|&x| space.check_vertex(x))
}

fn check_radii(radii: &[f64]) -> Result<()> {
    if radii.is_empty() {
        return Err(Error::arg("no radii given"));
    }
    if let Some(r) = radii.iter().find(|r| !(**r > 0.0 && r.is_finite())) {
        return Err(Error::arg(format!("radius {r} is not positive and finite")));
    }
    Ok(())
}

fn ball_mass(space: &MetricMeasureGraph, dist: &[f64], r: f64) -> f64 {
    dist.iter().zip(space.measures()).filter(|(d, _)| **d < r).map(|(_, m)| m).sum()
}

/// `C_D = max m(B(x,2r)) / m(B(x,r))`.
pub fn vd_constant<E: Executor>(space: &MetricMeasureGraph, centers: &[VertexId], radii: &[f64], cap: f64, exec: &E) -> Result<ConditionReport> {
    check_centers(space, centers)?;
    check_radii(radii)?;
    let rows = exec.map(centers, |&x| {
        let dist = space.distances_from(x);
        radii
            .iter()
            .map(|&r| ScaleEntry {
                x,
                r,
                big_r: None,
                value: Some(ball_mass(space, &dist, 2.0 * r) / ball_mass(space, &dist, r)),
                note: None,
            })
            .collect::<Vec<_>>()
    });
    ConditionReport::assemble(Condition::VolumeDoubling, rows.into_iter().flatten().collect(), cap)
}

/// `C_F = max Ψ(R)/Ψ(r) · m(B(x,r))/m(B(x,R))` over `(r, R)` pairs.
pub fn fvg_check<E: Executor>(
    space: &MetricMeasureGraph,
    psi: &ScalingFunction,
    centers: &[VertexId],
    scale_pairs: &[(f64, f64)],
    cap: f64,
    exec: &E,
) -> Result<ConditionReport> {
    check_centers(space, centers)?;
    check_pairs(scale_pairs)?;
    let rows = exec.map(centers, |&x| {
        let dist = space.distances_from(x);
        scale_pairs
            .iter()
            .map(|&(r, big_r)| ScaleEntry {
                x,
                r,
                big_r: Some(big_r),
                value: Some(psi.eval(big_r) / psi.eval(r) * ball_mass(space, &dist, r) / ball_mass(space, &dist, big_r)),
                note: None,
            })
            .collect::<Vec<_>>()
    });
    ConditionReport::assemble(Condition::FastVolumeGrowth, rows.into_iter().flatten().collect(), cap)
}

fn check_pairs(scale_pairs: &[(f64, f64)]) -> Result<()> {
    if scale_pairs.is_empty() {
        return Err(Error::arg("no scale pairs given"));
    }
    for &(r, big_r) in scale_pairs {
        if !(r > 0.0 && big_r >= r && big_r.is_finite()) {
            return Err(Error::arg(format!("scale pair ({r}, {big_r}) must satisfy 0 < r <= R")));
        }
    }
    Ok(())
}

/// Reverse doubling with a fixed exponent:
/// `C₁ = max (R/r)^α · m(B(x,r)) / m(B(x,R))`.
pub fn rvd_check<E: Executor>(
    space: &MetricMeasureGraph,
    centers: &[VertexId],
    scale_pairs: &[(f64, f64)],
    alpha: f64,
    cap: f64,
    exec: &E,
) -> Result<ConditionReport> {
    check_centers(space, centers)?;
    check_pairs(scale_pairs)?;
    if !(alpha > 0.0) {
        return Err(Error::arg("reverse doubling exponent must be positive"));
    }
    let rows = exec.map(centers, |&x| {
        let dist = space.distances_from(x);
        scale_pairs
            .iter()
            .map(|&(r, big_r)| ScaleEntry {
                x,
                r,
                big_r: Some(big_r),
                value: Some(math::powf(big_r / r, alpha) * ball_mass(space, &dist, r) / ball_mass(space, &dist, big_r)),
                note: None,
            })
            .collect::<Vec<_>>()
    });
    let mut rep = ConditionReport::assemble(Condition::ReverseDoubling, rows.into_iter().flatten().collect(), cap)?;
    rep.exponent = Some(alpha);
    Ok(rep)
}

/// Poincaré sweep for each enlargement factor; the report keeps the factor
/// with the smallest constant (ties go to the earlier factor).
#[allow(clippy::too_many_arguments)]
pub fn pi_sweep<E: Executor>(
    space: &MetricMeasureGraph,
    psi: &ScalingFunction,
    centers: &[VertexId],
    radii: &[f64],
    enlargements: &[f64],
    cap: f64,
    config: &SolverConfig,
    exec: &E,
) -> Result<ConditionReport> {
    check_centers(space, centers)?;
    check_radii(radii)?;
    if enlargements.is_empty() {
        return Err(Error::arg("no enlargement factors given"));
    }
    let mut best: Option<ConditionReport> = None;
    for &a in enlargements {
        let tuples: Vec<(VertexId, f64)> = centers.iter().flat_map(|&x| radii.iter().map(move |&r| (x, r))).collect();
        let entries = exec.map(&tuples, |&(x, r)| match poincare_constant(space, x, r, a, psi, config) {
            Ok(p) => ScaleEntry {
                x,
                r,
                big_r: None,
                value: Some(p.constant),
                note: (!p.converged).then(|| "eigenvalue iteration hit its cap".into()),
            },
            Err(e) => ScaleEntry {
                x,
                r,
                big_r: None,
                value: None,
                note: Some(format!("{e}")),
            },
        });
        let mut rep = ConditionReport::assemble(Condition::Poincare, entries, cap)?;
        rep.enlargement = Some(a);
        if best.as_ref().is_none_or(|b| rep.constant < b.constant) {
            best = Some(rep);
        }
    }
    Ok(best.unwrap())
}

/// `C₁ = max Cap(B(x,r), B(x,A₁r)ᶜ) Ψ(r) / m(B(x,r))`; tuples whose outer
/// ball covers the space are skipped with a warning.
#[allow(clippy::too_many_arguments)]
pub fn cap_upper_constant<E: Executor>(
    space: &MetricMeasureGraph,
    psi: &ScalingFunction,
    a1: f64,
    centers: &[VertexId],
    radii: &[f64],
    cap: f64,
    config: &SolverConfig,
    exec: &E,
) -> Result<ConditionReport> {
    check_centers(space, centers)?;
    check_radii(radii)?;
    if !(a1 > 1.0) {
        return Err(Error::arg(format!("A1 must exceed 1, got {a1}")));
    }
    let tuples: Vec<(VertexId, f64)> = centers.iter().flat_map(|&x| radii.iter().map(move |&r| (x, r))).collect();
    let entries = exec.map(&tuples, |&(x, r)| {
        let dist = space.distances_from(x);
        match capacity::ball_capacity_with(space, &dist, r, a1 * r, config) {
            Ok(c) => ScaleEntry {
                x,
                r,
                big_r: None,
                value: Some(c.value * psi.eval(r) / ball_mass(space, &dist, r)),
                note: None,
            },
            Err(e) => ScaleEntry {
                x,
                r,
                big_r: None,
                value: None,
                note: Some(format!("skipped: {e}")),
            },
        }
    });
    let mut rep = ConditionReport::assemble(Condition::CapacityUpper, entries, cap)?;
    rep.enlargement = Some(a1);
    Ok(rep)
}

/// Direct capacity across `k` nested annuli against the series bound.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ChainingReport {
    pub x: VertexId,
    #[cfg_attr(feature = "serde", serde(rename = "R"))]
    pub big_r: f64,
    pub a1: f64,
    pub k: u32,
    /// `Cap(B(x, A₁⁻ᵏR), B(x,R)ᶜ)`.
    pub direct: f64,
    /// `(Σᵢ Cap(B(x, A₁⁻ⁱ⁻¹R), B(x, A₁⁻ⁱR)ᶜ)⁻¹)⁻¹`.
    pub series_bound: f64,
    /// Capacities of the individual annuli, outermost first.
    pub annuli: Vec<f64>,
    pub slack: f64,
    pub holds: bool,
}

/// Checks `Cap(B(x,A₁⁻ᵏR), B(x,R)ᶜ) ≤ (Σ Cap(annulusᵢ)⁻¹)⁻¹`.
///
/// Inner balls are taken closed, as in [`ball_capacity`].
pub fn capacity_chaining_check(
    space: &MetricMeasureGraph,
    x: VertexId,
    big_r: f64,
    a1: f64,
    k: u32,
    config: &SolverConfig,
) -> Result<ChainingReport> {
    space.check_vertex(x)?;
    if !(a1 > 1.0) || k == 0 || !(big_r > 0.0) {
        return Err(Error::arg("need A1 > 1, k >= 1 and R > 0"));
    }
    let dist = space.distances_from(x);
    let radii: Vec<f64> = (0..=k).map(|i| big_r / math::powf(a1, i as f64)).collect();
    let count = |r: f64| dist.iter().filter(|&&d| d < r).count();
    for i in 0..k as usize {
        if count(radii[i]) == count(radii[i + 1]) {
            return Err(Error::arg(format!(
                "annulus between radii {} and {} is degenerate: both balls hold the same vertices",
                radii[i + 1],
                radii[i]
            )));
        }
    }
    let direct = capacity::ball_capacity_with(space, &dist, radii[k as usize], big_r, config)?.value;
    let mut annuli = Vec::with_capacity(k as usize);
    for i in 0..k as usize {
        annuli.push(capacity::ball_capacity_with(space, &dist, radii[i + 1], radii[i], config)?.value);
    }
    let series_bound = 1.0 / annuli.iter().map(|c| 1.0 / c).sum::<f64>();
    let slack = series_bound - direct;
    Ok(ChainingReport {
        x,
        big_r,
        a1,
        k,
        direct,
        series_bound,
        annuli,
        slack,
        holds: direct <= series_bound + 1e-9 * series_bound.max(1.0),
    })
}

/// Least-squares slope of `log y` against `log r`.
pub fn loglog_slope(r: &[f64], y: &[f64]) -> Result<f64> {
    if r.len() != y.len() || r.len() < 2 {
        return Err(Error::arg("need at least two points for a slope"));
    }
    let lr: Vec<f64> = r.iter().map(|&v| math::ln(v)).collect();
    let ly: Vec<f64> = y.iter().map(|&v| math::ln(v)).collect();
    let n = r.len() as f64;
    let mr = lr.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lr.iter().zip(&ly).map(|(a, b)| (a - mr) * (b - my)).sum();
    let sxx: f64 = lr.iter().map(|a| (a - mr) * (a - mr)).sum();
    if sxx == 0.0 {
        return Err(Error::arg("radii must not all be equal"));
    }
    Ok(sxy / sxx)
}

/// Volume growth exponent: slope of `log m(B(x,r))` against `log r`.
pub fn volume_exponent(space: &MetricMeasureGraph, x: VertexId, radii: &[f64]) -> Result<f64> {
    space.check_vertex(x)?;
    check_radii(radii)?;
    let dist = space.distances_from(x);
    let vols: Vec<f64> = radii.iter().map(|&r| ball_mass(space, &dist, r)).collect();
    loglog_slope(radii, &vols)
}

/// Walk exponent from resistance growth: slope of
/// `log (m(B(x,r)) / Cap(B(x,r), B(x,2r)ᶜ))` against `log r`.
pub fn walk_exponent(space: &MetricMeasureGraph, x: VertexId, radii: &[f64], config: &SolverConfig) -> Result<f64> {
    space.check_vertex(x)?;
    check_radii(radii)?;
    let dist = space.distances_from(x);
    let mut ys = Vec::with_capacity(radii.len());
    for &r in radii {
        let c = capacity::ball_capacity_with(space, &dist, r, 2.0 * r, config)?;
        ys.push(ball_mass(space, &dist, r) / c.value);
    }
    loglog_slope(radii, &ys)
}
