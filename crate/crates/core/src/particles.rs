//! Weighted particle configurations.
//!
//! A [`ParticleSystem`] is an atomic probability measure `Σ w_i δ_{x_i}` with
//! pairwise distinct positions. In one dimension the particles are kept sorted
//! increasingly; every 1D formula in this crate (inter-particle gaps, ball
//! diameters, quantile cells) relies on that ordering.

use crate::error::{Error, Result};

/// Tolerance on `|Σ w_i - 1|` below which weights are taken as they are.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct ParticleSystem {
    dim: usize,
    /// Flat row-major storage, `positions[i * dim + k]`.
    positions: Vec<f64>,
    weights: Vec<f64>,
}

impl ParticleSystem {
    /// Builds a validated system from flat positions (`len = N * dim`) and weights.
    ///
    /// In 1D the particles are sorted ascending, carrying their weights along.
    /// Weights are divided by their sum unless that sum is already 1 within
    /// [`WEIGHT_SUM_TOLERANCE`], which keeps the constructor idempotent.
    pub fn new(dim: usize, positions: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::UnsupportedDimension(dim));
        }
        if positions.len() != weights.len() * dim {
            return Err(Error::LengthMismatch {
                what: format!(
                    "{} coordinates for {} weights in dimension {dim}",
                    positions.len(),
                    weights.len()
                ),
            });
        }
        let n = weights.len();
        if n < 2 {
            return Err(Error::TooFewParticles(n));
        }
        if positions.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("positions"));
        }
        for (index, &value) in weights.iter().enumerate() {
            if !value.is_finite() {
                return Err(Error::NonFinite("weights"));
            }
            if value <= 0.0 {
                return Err(Error::NonpositiveWeight { index, value });
            }
        }

        let (positions, mut weights) = if dim == 1 {
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| positions[a].total_cmp(&positions[b]));
            for pair in order.windows(2) {
                if positions[pair[0]] == positions[pair[1]] {
                    return Err(Error::DuplicatePosition {
                        first: pair[0].min(pair[1]),
                        second: pair[0].max(pair[1]),
                    });
                }
            }
            (
                order.iter().map(|&i| positions[i]).collect(),
                order.iter().map(|&i| weights[i]).collect(),
            )
        } else {
            check_distinct(dim, &positions)?;
            (positions, weights)
        };

        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            for w in &mut weights {
                *w /= total;
            }
        }

        Ok(Self {
            dim,
            positions,
            weights,
        })
    }

    /// Convenience constructor for one-dimensional systems.
    pub fn from_1d(positions: &[f64], weights: &[f64]) -> Result<Self> {
        Self::new(1, positions.to_vec(), weights.to_vec())
    }

    /// Same weights (bit for bit), new positions.
    ///
    /// Unlike [`ParticleSystem::new`] this never reorders: in 1D a broken
    /// ordering is reported as [`Error::OrderingViolated`], and in 2D two equal
    /// points as [`Error::CoincidentParticles`].
    pub fn with_positions(&self, positions: Vec<f64>) -> Result<Self> {
        if positions.len() != self.positions.len() {
            return Err(Error::LengthMismatch {
                what: format!(
                    "{} coordinates, expected {}",
                    positions.len(),
                    self.positions.len()
                ),
            });
        }
        if positions.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("positions"));
        }
        if self.dim == 1 {
            if let Some(i) = positions.windows(2).position(|p| p[1] <= p[0]) {
                return Err(Error::OrderingViolated {
                    first: i,
                    second: i + 1,
                });
            }
        } else if let Err(Error::DuplicatePosition { first, second }) =
            check_distinct(self.dim, &positions)
        {
            return Err(Error::CoincidentParticles { first, second });
        }
        Ok(Self {
            dim: self.dim,
            positions,
            weights: self.weights.clone(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    /// Always false; a system holds at least two particles.
    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.positions[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.positions.chunks_exact(self.dim)
    }

    /// Inter-particle gaps `Δx_1, …, Δx_{N+1}` of a 1D system, with
    /// `Δx_1 = Δx_{N+1} = +∞`. Entry `i` is the gap to the left of particle `i`.
    pub fn gaps(&self) -> Vec<f64> {
        debug_assert_eq!(self.dim, 1);
        let n = self.len();
        let mut gaps = Vec::with_capacity(n + 1);
        gaps.push(f64::INFINITY);
        gaps.extend(self.positions.windows(2).map(|p| p[1] - p[0]));
        gaps.push(f64::INFINITY);
        gaps
    }

    /// Largest distance between two particles.
    pub fn diameter(&self) -> f64 {
        if self.dim == 1 {
            return self.positions[self.len() - 1] - self.positions[0];
        }
        let mut best = 0.0f64;
        for i in 0..self.len() {
            for j in i + 1..self.len() {
                best = best.max(distance(self.point(i), self.point(j)));
            }
        }
        best
    }

    /// `Σ_i w_i x_i`.
    pub fn center_of_mass(&self) -> Vec<f64> {
        let mut c = vec![0.0; self.dim];
        for (x, &w) in self.points().zip(&self.weights) {
            for (ck, xk) in c.iter_mut().zip(x) {
                *ck += w * xk;
            }
        }
        c
    }
}

pub(crate) fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

fn check_distinct(dim: usize, positions: &[f64]) -> Result<()> {
    let n = positions.len() / dim;
    let mut order: Vec<usize> = (0..n).collect();
    let key = |i: usize| &positions[i * dim..(i + 1) * dim];
    order.sort_by(|&a, &b| {
        key(a)
            .iter()
            .zip(key(b))
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    for pair in order.windows(2) {
        if key(pair[0]) == key(pair[1]) {
            return Err(Error::DuplicatePosition {
                first: pair[0].min(pair[1]),
                second: pair[0].max(pair[1]),
            });
        }
    }
    Ok(())
}

/// Piecewise-constant density behind a 1D system, drawn as the polyline
/// through the centres of its constant pieces.
///
/// Particle `i` contributes height `w_i / r_i` on an interval of length
/// `r_i = softmin_p(Δx_i, Δx_{i+1})` centred at `x_i`. Returns `(x_i, w_i / r_i)`.
pub fn density_reconstruction(sys: &ParticleSystem, p: f64) -> Result<Vec<(f64, f64)>> {
    if sys.dim() != 1 {
        return Err(Error::UnsupportedDimension(sys.dim()));
    }
    let volumes = crate::energy::ball_volumes_1d(sys, p)?;
    Ok(sys
        .positions()
        .iter()
        .zip(sys.weights())
        .zip(volumes)
        .map(|((&x, &w), r)| (x, w / r))
        .collect())
}
