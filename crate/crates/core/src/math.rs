//! Float helpers; `core` has no libm.

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

#[inline]
pub fn abs(x: f64) -> f64 {
    libm::fabs(x)
}

#[inline]
pub fn round(x: f64) -> f64 {
    libm::round(x)
}

/// Relative difference `|a - b| / max(|a|, |b|, tiny)`.
#[cfg(test)]
pub fn rel_diff(a: f64, b: f64) -> f64 {
    let scale = abs(a).max(abs(b)).max(f64::MIN_POSITIVE);
    abs(a - b) / scale
}
