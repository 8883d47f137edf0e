//! The space-time scaling function `Ψ`.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;

/// An increasing bijection of `(0, ∞)` giving the time scale of a length.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "lowercase"))]
pub enum ScalingFunction {
    /// `Ψ(r) = r^β`. `β = 0` gives the constant function used by some
    /// oracles; it is not a valid scaling and fails validation.
    Power { beta: f64 },
    /// Piecewise linear in log-log coordinates through `(r, Ψ(r))` samples,
    /// extended by the end slopes.
    Tabulated { points: Vec<(f64, f64)> },
}

impl ScalingFunction {
    pub fn power(beta: f64) -> Result<Self> {
        if !(beta.is_finite() && beta >= 0.0) {
            return Err(Error::arg(format!("power exponent must be finite and nonnegative, got {beta}")));
        }
        Ok(ScalingFunction::Power { beta })
    }

    /// Radii must be strictly increasing; values must be positive.
    pub fn tabulated(points: Vec<(f64, f64)>) -> Result<Self> {
        let s = ScalingFunction::Tabulated { points };
        s.check()?;
        Ok(s)
    }

    /// Structural checks for deserialized values.
    pub fn check(&self) -> Result<()> {
        match self {
            ScalingFunction::Power { beta } => {
                if !(beta.is_finite() && *beta >= 0.0) {
                    return Err(Error::arg(format!("power exponent must be finite and nonnegative, got {beta}")));
                }
            }
            ScalingFunction::Tabulated { points } => {
                if points.len() < 2 {
                    return Err(Error::arg("tabulated scaling needs at least two points"));
                }
                for &(r, v) in points {
                    if !(r.is_finite() && r > 0.0 && v.is_finite() && v > 0.0) {
                        return Err(Error::arg(format!("tabulated point ({r}, {v}) must be positive and finite")));
                    }
                }
                for w in points.windows(2) {
                    if w[1].0 <= w[0].0 {
                        return Err(Error::arg(format!("tabulated radii not increasing at {}", w[1].0)));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn eval(&self, r: f64) -> f64 {
        match self {
            ScalingFunction::Power { beta } => {
                if *beta == 0.0 {
                    1.0
                } else if *beta == 2.0 {
                    r * r
                } else {
                    math::powf(r, *beta)
                }
            }
            ScalingFunction::Tabulated { points } => {
                let lr = math::ln(r);
                let seg = match points.iter().position(|p| p.0 >= r) {
                    Some(0) => 0,
                    Some(i) => i - 1,
                    None => points.len() - 2,
                };
                let (r0, v0) = points[seg];
                let (r1, v1) = points[seg + 1];
                let (l0, l1) = (math::ln(r0), math::ln(r1));
                let slope = (math::ln(v1) - math::ln(v0)) / (l1 - l0);
                math::exp(math::ln(v0) + slope * (lr - l0))
            }
        }
    }
}

/// Outcome of [`validate_scaling`].
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScalingReport {
    pub scale_range: (f64, f64),
    pub samples: usize,
    /// Least-squares slope of `log Ψ` against `log r`.
    pub regression_slope: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub c_reg: f64,
    /// `0 < β₁` and the two-sided bound holds on every sampled pair.
    pub feasible: bool,
}

/// Fits regularity exponents on a geometric grid of `samples` radii.
///
/// `β₁` and `β₂` are the extreme pairwise log-log slopes, and `c_reg` is the
/// smallest constant making the two-sided power bound hold on every sampled
/// pair for those exponents.
pub fn validate_scaling(psi: &ScalingFunction, scale_range: (f64, f64), samples: usize) -> Result<ScalingReport> {
    psi.check()?;
    let (lo, hi) = scale_range;
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(Error::arg(format!("scale range must satisfy 0 < r_min < r_max, got ({lo}, {hi})")));
    }
    if samples < 2 {
        return Err(Error::arg("need at least two samples"));
    }
    let step = (math::ln(hi) - math::ln(lo)) / (samples - 1) as f64;
    let radii: Vec<f64> = (0..samples)
        .map(|i| if i + 1 == samples { hi } else { math::exp(math::ln(lo) + step * i as f64) })
        .collect();
    let values: Vec<f64> = radii.iter().map(|&r| psi.eval(r)).collect();
    for i in 1..samples {
        if !(values[i] > values[i - 1]) {
            return Err(Error::Validation(format!(
                "scaling function not increasing: psi({}) = {} >= psi({}) = {}",
                radii[i - 1],
                values[i - 1],
                radii[i],
                values[i]
            )));
        }
    }

    let lr: Vec<f64> = radii.iter().map(|&r| math::ln(r)).collect();
    let lv: Vec<f64> = values.iter().map(|&v| math::ln(v)).collect();
    let n = samples as f64;
    let mr = lr.iter().sum::<f64>() / n;
    let mv = lv.iter().sum::<f64>() / n;
    let sxy: f64 = lr.iter().zip(&lv).map(|(x, y)| (x - mr) * (y - mv)).sum();
    let sxx: f64 = lr.iter().map(|x| (x - mr) * (x - mr)).sum();
    let regression_slope = sxy / sxx;

    let mut beta1 = f64::INFINITY;
    let mut beta2 = f64::NEG_INFINITY;
    for i in 0..samples {
        for j in i + 1..samples {
            let s = (lv[j] - lv[i]) / (lr[j] - lr[i]);
            beta1 = beta1.min(s);
            beta2 = beta2.max(s);
        }
    }
    let c_reg = regularity_constant(&lr, &lv, beta1, beta2);
    Ok(ScalingReport {
        scale_range,
        samples,
        regression_slope,
        beta1,
        beta2,
        c_reg,
        feasible: beta1 > 0.0 && c_reg.is_finite(),
    })
}

/// Smallest `C ≥ 1` with `C⁻¹ (R/r)^β₁ ≤ Ψ(R)/Ψ(r) ≤ C (R/r)^β₂` over all
/// sampled pairs, given log radii and log values.
fn regularity_constant(lr: &[f64], lv: &[f64], beta1: f64, beta2: f64) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..lr.len() {
        for j in i + 1..lr.len() {
            let lx = lr[j] - lr[i];
            let ly = lv[j] - lv[i];
            worst = worst.max(ly - beta2 * lx).max(beta1 * lx - ly);
        }
    }
    math::exp(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn square_is_exactly_regular() {
        let psi = ScalingFunction::power(2.0).unwrap();
        let rep = validate_scaling(&psi, (1.0, 100.0), 40).unwrap();
        assert!((rep.beta1 - 2.0).abs() < 1e-12);
        assert!((rep.beta2 - 2.0).abs() < 1e-12);
        assert!((rep.c_reg - 1.0).abs() < 1e-12);
        assert!(rep.feasible);
    }

    #[test]
    fn piecewise_power_has_two_exponents() {
        let pts: Vec<(f64, f64)> = (-6..=6)
            .map(|k| {
                let r = math::powf(2.0, k as f64);
                (r, if r <= 1.0 { r * r } else { r * r * r })
            })
            .collect();
        let psi = ScalingFunction::tabulated(pts).unwrap();
        assert!((psi.eval(1.5) - 3.375).abs() < 1e-12);
        let rep = validate_scaling(&psi, (0.05, 20.0), 50).unwrap();
        assert!((rep.beta1 - 2.0).abs() < 1e-9, "{rep:?}");
        assert!((rep.beta2 - 3.0).abs() < 1e-9, "{rep:?}");
        assert!(rep.c_reg < 1.0 + 1e-9);
    }

    #[test]
    fn tabulated_matches_samples() {
        let psi = ScalingFunction::tabulated(vec![(1.0, 1.0), (2.0, 5.0), (4.0, 26.0)]).unwrap();
        assert!((psi.eval(2.0) - 5.0).abs() < 1e-12);
        assert!((psi.eval(4.0) - 26.0).abs() < 1e-12);
        assert!((psi.eval(8.0) - 26.0 * 26.0 / 5.0).abs() < 1e-9);
    }

    #[test]
    fn non_monotone_table_is_rejected_with_pair() {
        let psi = ScalingFunction::tabulated(vec![(1.0, 1.0), (2.0, 4.0), (3.0, 2.0), (4.0, 16.0)]).unwrap();
        match validate_scaling(&psi, (1.0, 4.0), 30) {
            Err(Error::Validation(msg)) => assert!(msg.contains("not increasing")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn constant_function_is_infeasible() {
        let psi = ScalingFunction::power(0.0).unwrap();
        assert!(validate_scaling(&psi, (1.0, 2.0), 5).is_err());
    }

    #[test]
    fn bad_ranges_are_rejected() {
        let psi = ScalingFunction::power(2.0).unwrap();
        assert!(validate_scaling(&psi, (0.0, 2.0), 5).is_err());
        assert!(validate_scaling(&psi, (3.0, 2.0), 5).is_err());
        assert!(ScalingFunction::tabulated(vec![(1.0, 1.0)]).is_err());
        assert!(ScalingFunction::tabulated(vec![(2.0, 1.0), (1.0, 2.0)]).is_err());
    }
}
