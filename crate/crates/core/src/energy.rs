//! Discrete energy of a particle system and its weighted gradient.
//!
//! ```text
//! E(x) = Σ_i |B_i| H(w_i / |B_i|) + Σ_i w_i V(x_i) + ½ Σ_{i≠j} w_i w_j W(x_i - x_j)
//! ```
//!
//! Ball volumes `|B_i|` come from the softmin of inter-particle distances:
//!
//! * 1D: `|B_i| = softmin_p(Δx_i, Δx_{i+1})`, the adjacent gaps, with infinite
//!   outer gaps. End particles therefore get `2^{1/p}` times their single gap.
//! * general `d`: radius `½ softmin_p{|x_i - x_j| : j ≠ i}` over all other
//!   particles, volume `ω_d r^d`.
//!
//! 1D systems always use the adjacent-gap rule and 2D systems the all-pairs
//! rule; [`ball_volume_general`] is still available on 1D input for comparison.
//!
//! All evaluations are O(N²) because of the interaction sum (and, in 2D, the
//! all-pairs radii).

use crate::error::{Error, Result};
use crate::model::{EnergySpec, Internal};
use crate::particles::{distance, ParticleSystem};
use crate::softmin;

/// Relative distance (to the system diameter) under which two particles count as collided.
pub const COINCIDENCE_TOLERANCE: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EnergyBreakdown {
    pub internal: f64,
    pub confinement: f64,
    pub interaction: f64,
    pub total: f64,
}

impl EnergyBreakdown {
    fn from_parts(internal: f64, confinement: f64, interaction: f64) -> Self {
        Self {
            internal,
            confinement,
            interaction,
            total: internal + confinement + interaction,
        }
    }
}

/// Volume of the unit ball in dimension 1 or 2.
pub fn unit_ball_volume(dim: usize) -> f64 {
    match dim {
        1 => 2.0,
        2 => std::f64::consts::PI,
        _ => unreachable!("dimension validated by ParticleSystem"),
    }
}

fn check_p(p: f64) -> Result<()> {
    if p.is_finite() && p > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("softmin exponent p = {p}")))
    }
}

fn require_1d(sys: &ParticleSystem) -> Result<()> {
    if sys.dim() == 1 {
        Ok(())
    } else {
        Err(Error::UnsupportedDimension(sys.dim()))
    }
}

/// `r_i^p = softmin_p(Δx_i, Δx_{i+1})` for particle `i` (0-based) of a 1D system.
pub fn ball_volume_1d(sys: &ParticleSystem, i: usize, p: f64) -> Result<f64> {
    require_1d(sys)?;
    check_p(p)?;
    let x = sys.positions();
    let left = if i == 0 {
        f64::INFINITY
    } else {
        x[i] - x[i - 1]
    };
    let right = if i + 1 == x.len() {
        f64::INFINITY
    } else {
        x[i + 1] - x[i]
    };
    Ok(softmin::pair(left, right, p))
}

pub fn ball_volumes_1d(sys: &ParticleSystem, p: f64) -> Result<Vec<f64>> {
    require_1d(sys)?;
    check_p(p)?;
    let gaps = sys.gaps();
    Ok(gaps
        .windows(2)
        .map(|g| softmin::pair(g[0], g[1], p))
        .collect())
}

/// Volume of the ball of radius `½ softmin_p{|x_i - x_j| : j ≠ i}` around particle `i`.
pub fn ball_volume_general(sys: &ParticleSystem, i: usize, p: f64) -> Result<f64> {
    check_p(p)?;
    let xi = sys.point(i);
    let dists: Vec<f64> = (0..sys.len())
        .filter(|&j| j != i)
        .map(|j| distance(xi, sys.point(j)))
        .collect();
    let radius = 0.5
        * if dists.len() == 1 {
            dists[0]
        } else {
            softmin::softmin(&dists, p)?
        };
    Ok(unit_ball_volume(sys.dim()) * radius.powi(sys.dim() as i32))
}

pub fn ball_volumes_general(sys: &ParticleSystem, p: f64) -> Result<Vec<f64>> {
    check_p(p)?;
    let pairs = PairTable::new(sys)?;
    Ok(pairs
        .radii(p)
        .map(|r| unit_ball_volume(sys.dim()) * r.powi(sys.dim() as i32))
        .collect())
}

/// Ball volumes under the rule that belongs to the system's dimension.
pub fn ball_volumes(sys: &ParticleSystem, p: f64) -> Result<Vec<f64>> {
    if sys.dim() == 1 {
        ball_volumes_1d(sys, p)
    } else {
        ball_volumes_general(sys, p)
    }
}

/// `vol · H(w / vol)`.
pub fn internal_term(kind: Internal, w: f64, vol: f64) -> f64 {
    kind.term(w, vol)
}

/// Dense table of pairwise distances (general-d rule).
struct PairTable {
    n: usize,
    dist: Vec<f64>,
}

impl PairTable {
    fn new(sys: &ParticleSystem) -> Result<Self> {
        let n = sys.len();
        let mut dist = vec![0.0; n * n];
        let mut closest = (f64::INFINITY, 0, 0);
        let mut diameter = 0.0f64;
        for i in 0..n {
            for j in i + 1..n {
                let d = distance(sys.point(i), sys.point(j));
                dist[i * n + j] = d;
                dist[j * n + i] = d;
                if d < closest.0 {
                    closest = (d, i, j);
                }
                diameter = diameter.max(d);
            }
        }
        if closest.0 <= COINCIDENCE_TOLERANCE * diameter {
            return Err(Error::CoincidentParticles {
                first: closest.1,
                second: closest.2,
            });
        }
        Ok(Self { n, dist })
    }

    fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        (0..self.n)
            .filter(move |&j| j != i)
            .map(move |j| (j, self.dist[i * self.n + j]))
    }

    /// Softmin over row `i`.
    fn softmin_row(&self, i: usize, p: f64) -> f64 {
        let t = self.row(i).map(|(_, d)| d).fold(f64::INFINITY, f64::min);
        let sum: f64 = self.row(i).map(|(_, d)| (t / d).powf(p)).sum();
        t * (sum / (self.n - 1) as f64).powf(-1.0 / p)
    }

    fn radii(&self, p: f64) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |i| 0.5 * self.softmin_row(i, p))
    }
}

fn check_gaps_1d(sys: &ParticleSystem) -> Result<()> {
    let tol = COINCIDENCE_TOLERANCE * sys.diameter();
    let x = sys.positions();
    if let Some(i) = x.windows(2).position(|w| w[1] - w[0] <= tol) {
        return Err(Error::CoincidentParticles {
            first: i,
            second: i + 1,
        });
    }
    Ok(())
}

/// Discrete energy split into its three parts.
pub fn discrete_energy(sys: &ParticleSystem, spec: &EnergySpec) -> Result<EnergyBreakdown> {
    spec.validate()?;
    let w = sys.weights();
    let n = sys.len();

    let internal = if sys.dim() == 1 {
        check_gaps_1d(sys)?;
        if matches!(spec.internal, Internal::None) {
            0.0
        } else {
            let volumes = ball_volumes_1d(sys, spec.p)?;
            w.iter()
                .zip(&volumes)
                .map(|(&wi, &v)| spec.internal.term(wi, v))
                .sum()
        }
    } else {
        let pairs = PairTable::new(sys)?;
        if matches!(spec.internal, Internal::None) {
            0.0
        } else {
            let omega = unit_ball_volume(sys.dim());
            pairs
                .radii(spec.p)
                .zip(w)
                .map(|(r, &wi)| spec.internal.term(wi, omega * r.powi(sys.dim() as i32)))
                .sum()
        }
    };

    let confinement: f64 = sys
        .points()
        .zip(w)
        .map(|(x, &wi)| wi * spec.confinement.value(x))
        .sum();

    let mut interaction = 0.0;
    if !spec.interaction.is_none() {
        let mut z = vec![0.0; sys.dim()];
        for i in 0..n {
            for j in i + 1..n {
                for (zk, (a, b)) in z.iter_mut().zip(sys.point(i).iter().zip(sys.point(j))) {
                    *zk = a - b;
                }
                interaction += w[i] * w[j] * spec.interaction.value(&z);
            }
        }
    }

    Ok(EnergyBreakdown::from_parts(
        internal,
        confinement,
        interaction,
    ))
}

/// Plain gradient `∂E/∂x_i`, flat with the layout of [`ParticleSystem::positions`].
pub fn energy_gradient(sys: &ParticleSystem, spec: &EnergySpec) -> Result<Vec<f64>> {
    spec.validate()?;
    let dim = sys.dim();
    let n = sys.len();
    let w = sys.weights();
    let mut grad = vec![0.0; n * dim];

    if dim == 1 {
        check_gaps_1d(sys)?;
        if !matches!(spec.internal, Internal::None) {
            internal_gradient_1d(sys, spec, &mut grad);
        }
    } else {
        let pairs = PairTable::new(sys)?;
        if !matches!(spec.internal, Internal::None) {
            internal_gradient_general(sys, spec, &pairs, &mut grad);
        }
    }

    if !spec.confinement.is_none() {
        for (i, x) in sys.points().enumerate() {
            spec.confinement
                .add_gradient(x, w[i], &mut grad[i * dim..(i + 1) * dim]);
        }
    }

    if !spec.interaction.is_none() {
        let mut z = vec![0.0; dim];
        for i in 0..n {
            for j in i + 1..n {
                for (zk, (a, b)) in z.iter_mut().zip(sys.point(i).iter().zip(sys.point(j))) {
                    *zk = a - b;
                }
                let f = w[i] * w[j] * spec.interaction.gradient_factor(&z);
                for k in 0..dim {
                    grad[i * dim + k] += f * z[k];
                    grad[j * dim + k] -= f * z[k];
                }
            }
        }
    }

    Ok(grad)
}

/// Weighted gradient `∇_w E`: component `i` is `(1/w_i) ∂E/∂x_i`.
/// The flow velocity is its negative.
pub fn weighted_gradient(sys: &ParticleSystem, spec: &EnergySpec) -> Result<Vec<f64>> {
    let mut grad = energy_gradient(sys, spec)?;
    let dim = sys.dim();
    for (i, &wi) in sys.weights().iter().enumerate() {
        for g in &mut grad[i * dim..(i + 1) * dim] {
            *g /= wi;
        }
    }
    if grad.iter().any(|g| !g.is_finite()) {
        return Err(Error::NonFinite("weighted gradient"));
    }
    Ok(grad)
}

fn internal_gradient_1d(sys: &ParticleSystem, spec: &EnergySpec, grad: &mut [f64]) {
    let gaps = sys.gaps();
    let w = sys.weights();
    let n = sys.len();
    // dE/dgap[k], where gap[k] = x_k - x_{k-1}; the outer gaps are constant.
    let mut de_dgap = vec![0.0; n + 1];
    for i in 0..n {
        let (vol, d_left, d_right) = softmin::pair_with_gradient(gaps[i], gaps[i + 1], spec.p);
        let q = spec.internal.term_dvol(w[i], vol);
        de_dgap[i] += q * d_left;
        de_dgap[i + 1] += q * d_right;
    }
    for k in 1..n {
        grad[k] += de_dgap[k];
        grad[k - 1] -= de_dgap[k];
    }
}

fn internal_gradient_general(
    sys: &ParticleSystem,
    spec: &EnergySpec,
    pairs: &PairTable,
    grad: &mut [f64],
) {
    let dim = sys.dim();
    let n = sys.len();
    let w = sys.weights();
    let p = spec.p;
    let omega = unit_ball_volume(dim);
    let scale = 1.0 / (n - 1) as f64;
    for i in 0..n {
        let s = pairs.softmin_row(i, p);
        let r = 0.5 * s;
        let vol = omega * r.powi(dim as i32);
        // dvol/dS with r = S/2
        let dvol_ds = 0.5 * omega * dim as f64 * r.powi(dim as i32 - 1);
        let q = spec.internal.term_dvol(w[i], vol) * dvol_ds;
        let xi = sys.point(i);
        for (j, d) in pairs.row(i) {
            let c = q * scale * (s / d).powf(p + 1.0) / d;
            let xj = sys.point(j);
            for k in 0..dim {
                let u = c * (xi[k] - xj[k]);
                grad[i * dim + k] += u;
                grad[j * dim + k] -= u;
            }
        }
    }
}
