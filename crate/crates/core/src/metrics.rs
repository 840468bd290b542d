//! Errors and diagnostics along a run.

use crate::energy::{ball_volumes, EnergyBreakdown};
use crate::error::{Error, Result};
use crate::exact::ReferenceSolution;
use crate::particles::ParticleSystem;
use std::sync::OnceLock;

/// Per-snapshot diagnostics of a run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MetricSeries {
    pub times: Vec<f64>,
    pub energy: Vec<EnergyBreakdown>,
    pub second_moment: Vec<f64>,
    pub entropy: Vec<f64>,
    /// Error against a reference, when one has been attached.
    pub errors: Option<Vec<f64>>,
}

impl MetricSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn push(&mut self, t: f64, energy: EnergyBreakdown, second_moment: f64, entropy: f64) {
        self.times.push(t);
        self.energy.push(energy);
        self.second_moment.push(second_moment);
        self.entropy.push(entropy);
    }

    pub fn total_energy(&self) -> Vec<f64> {
        self.energy.iter().map(|e| e.total).collect()
    }
}

const GL_ORDER: usize = 32;
/// Quantile evaluation nodes are clamped to `[EPS_CLAMP, 1 - EPS_CLAMP]`.
const EPS_CLAMP: f64 = 1e-14;
/// Geometric refinement levels for cells that touch `ε = 0` or `ε = 1`.
const END_CELL_LEVELS: usize = 40;

/// Gauss–Legendre nodes and weights on `[-1, 1]`, by Newton on `P_n`.
fn gauss_legendre() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = GL_ORDER;
        let mut rule = Vec::with_capacity(n);
        for k in 0..n {
            let mut x = (std::f64::consts::PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for j in 2..=n {
                    let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            rule.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
        }
        rule
    })
}

fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    gauss_legendre()
        .iter()
        .map(|&(x, w)| w * f(mid + half * x))
        .sum::<f64>()
        * half
}

/// Integral over a cell, refined geometrically towards the ends of `[0, 1]`
/// where Gaussian quantiles are unbounded.
fn integrate_cell<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    touches_lo: bool,
    touches_hi: bool,
) -> f64 {
    match (touches_lo, touches_hi) {
        (false, false) => integrate(f, a, b),
        (true, true) => {
            let mid = 0.5 * (a + b);
            integrate_cell(f, a, mid, true, false) + integrate_cell(f, mid, b, false, true)
        }
        (true, false) => {
            let mut sum = 0.0;
            let mut right = b;
            for _ in 0..END_CELL_LEVELS {
                let left = a + 0.5 * (right - a);
                sum += integrate(f, left, right);
                right = left;
            }
            sum + integrate(f, a, right)
        }
        (false, true) => {
            let mut sum = 0.0;
            let mut left = a;
            for _ in 0..END_CELL_LEVELS {
                let right = b - 0.5 * (b - left);
                sum += integrate(f, left, right);
                left = right;
            }
            sum + integrate(f, left, b)
        }
    }
}

/// Quadratic Wasserstein distance between a 1D system and a reference at time `t`,
///
/// ```text
/// e = ( Σ_i ∫_{Ω_{i-1}}^{Ω_i} (x_i - Φ(t, ε))² dε )^{1/2},   Ω_i = w_1 + … + w_i.
/// ```
pub fn wasserstein_error(
    sys: &ParticleSystem,
    reference: &ReferenceSolution,
    t: f64,
) -> Result<f64> {
    wasserstein_error_with(sys, |eps| reference.quantile(t, eps))
}

/// [`wasserstein_error`] against an arbitrary quantile function `Φ` on `[0, 1]`.
pub fn wasserstein_error_with<Q: Fn(f64) -> f64>(sys: &ParticleSystem, quantile: Q) -> Result<f64> {
    if sys.dim() != 1 {
        return Err(Error::UnsupportedDimension(sys.dim()));
    }
    let n = sys.len();
    let mut omega = 0.0;
    let mut total = 0.0;
    for (i, (&x, &w)) in sys.positions().iter().zip(sys.weights()).enumerate() {
        let lo = omega;
        let hi = if i + 1 == n { 1.0 } else { omega + w };
        let f = |eps: f64| {
            let q = quantile(eps.clamp(EPS_CLAMP, 1.0 - EPS_CLAMP));
            (x - q) * (x - q)
        };
        total += integrate_cell(&f, lo, hi, i == 0, i + 1 == n);
        omega = hi;
    }
    Ok(total.sqrt())
}

/// Weighted Euclidean distance `(Σ w_i |x_i - y_i|²)^{1/2}` between two systems with the same weights.
pub fn discrete_error(a: &ParticleSystem, b: &ParticleSystem) -> Result<f64> {
    if a.len() != b.len() || a.dim() != b.dim() {
        return Err(Error::WeightMismatch);
    }
    if a.weights()
        .iter()
        .zip(b.weights())
        .any(|(x, y)| (x - y).abs() > 1e-12)
    {
        return Err(Error::WeightMismatch);
    }
    let sum: f64 = a
        .points()
        .zip(b.points())
        .zip(a.weights())
        .map(|((x, y), &w)| w * x.iter().zip(y).map(|(p, q)| (p - q) * (p - q)).sum::<f64>())
        .sum();
    Ok(sum.sqrt())
}

/// `Σ w_i |x_i|²`.
pub fn second_moment(sys: &ParticleSystem) -> f64 {
    sys.points()
        .zip(sys.weights())
        .map(|(x, &w)| w * x.iter().map(|v| v * v).sum::<f64>())
        .sum()
}

/// `Σ w_i log(w_i / |B_i|)` with the ball rule of the system's dimension.
pub fn discrete_entropy(sys: &ParticleSystem, p: f64) -> Result<f64> {
    let volumes = ball_volumes(sys, p)?;
    Ok(sys
        .weights()
        .iter()
        .zip(&volumes)
        .map(|(&w, &v)| w * (w / v).ln())
        .sum())
}

/// Weighted RMS speed `(Σ w_i |v_i|²)^{1/2}` of a velocity field laid out like positions.
pub fn velocity_norm(sys: &ParticleSystem, velocity: &[f64]) -> f64 {
    let d = sys.dim();
    sys.weights()
        .iter()
        .enumerate()
        .map(|(i, &w)| {
            w * velocity[i * d..(i + 1) * d]
                .iter()
                .map(|v| v * v)
                .sum::<f64>()
        })
        .sum::<f64>()
        .sqrt()
}

/// Ordinary least-squares slope of `ys` against `xs`.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::LengthMismatch {
            what: format!("{} abscissae for {} ordinates", xs.len(), ys.len()),
        });
    }
    if xs.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "slope fit needs at least 2 points, got {}",
            xs.len()
        )));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData("all abscissae coincide".into()));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Ok(sxy / sxx)
}

/// Discrete critical attraction `χ_2(N) = 1 + 1/(N - 1)`.
pub fn chi_critical(n: usize) -> f64 {
    1.0 + 1.0 / (n as f64 - 1.0)
}

/// `dM_2/dt = 2 (1 - χ (1 - 1/N))` for the unconfined equal-weight log-attraction flow.
pub fn predicted_moment_slope(n: usize, chi: f64) -> f64 {
    2.0 * (1.0 - chi * (1.0 - 1.0 / n as f64))
}
