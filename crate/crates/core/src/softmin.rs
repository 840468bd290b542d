//! Smooth approximation of the minimum,
//!
//! ```text
//! softmin_p(x_1, …, x_s) = ((1/s) Σ x_i^{-p})^{-1/p}
//! ```
//!
//! It satisfies `min(x) ≤ softmin_p(x) ≤ s^{1/p} min(x)` (upper bound for
//! `p ≥ 1`), is non-increasing in `p`, and tends to `min(x)` as `p → ∞`.
//! Entries equal to `+∞` contribute nothing to the sum, so `softmin_p(a, ∞)`
//! is `2^{1/p} a`.
//!
//! Evaluation is scaled by `t = min(x)`: `softmin = t ((1/s) Σ (t/x_i)^p)^{-1/p}`,
//! keeping every ratio in `(0, 1]` even for very large `p`.

use crate::error::{Error, Result};

fn check(values: &[f64], p: f64) -> Result<f64> {
    if values.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "softmin needs at least 2 values, got {}",
            values.len()
        )));
    }
    if !(p.is_finite() && p > 0.0) {
        return Err(Error::InvalidParameter(format!("softmin exponent p = {p}")));
    }
    let mut t = f64::INFINITY;
    for (index, &value) in values.iter().enumerate() {
        if value.is_nan() || value <= 0.0 {
            return Err(Error::NonpositiveInput { index, value });
        }
        t = t.min(value);
    }
    if t.is_infinite() {
        return Err(Error::AllInfinite);
    }
    Ok(t)
}

fn scaled_value(values: &[f64], p: f64, t: f64) -> f64 {
    let s = values.len() as f64;
    let sum: f64 = values.iter().map(|&x| (t / x).powf(p)).sum();
    t * (sum / s).powf(-1.0 / p)
}

pub fn softmin(values: &[f64], p: f64) -> Result<f64> {
    let t = check(values, p)?;
    Ok(scaled_value(values, p, t))
}

/// Partial derivatives `∂softmin_p/∂x_k = (1/s) (softmin_p / x_k)^{p+1}`.
///
/// Components belonging to infinite entries are zero. Degree-one homogeneity
/// gives `Σ_k x_k ∂_k = softmin_p(x)` over the finite entries.
pub fn softmin_gradient(values: &[f64], p: f64) -> Result<Vec<f64>> {
    let t = check(values, p)?;
    let value = scaled_value(values, p, t);
    let s = values.len() as f64;
    Ok(values
        .iter()
        .map(|&x| (value / x).powf(p + 1.0) / s)
        .collect())
}

/// Two-argument softmin with partial derivatives, for the 1D ball diameters.
///
/// Arguments must be positive and at most one may be infinite.
#[inline]
pub(crate) fn pair_with_gradient(a: f64, b: f64, p: f64) -> (f64, f64, f64) {
    let t = a.min(b);
    let sum = (t / a).powf(p) + (t / b).powf(p);
    let value = t * (0.5 * sum).powf(-1.0 / p);
    let da = 0.5 * (value / a).powf(p + 1.0);
    let db = 0.5 * (value / b).powf(p + 1.0);
    (value, da, db)
}

#[inline]
pub(crate) fn pair(a: f64, b: f64, p: f64) -> f64 {
    let t = a.min(b);
    let sum = (t / a).powf(p) + (t / b).powf(p);
    t * (0.5 * sum).powf(-1.0 / p)
}
