//! Initial particle systems sampled from continuum profiles.
//!
//! Two 1D schemes: equal weights placed at the quantiles `Φ_0((2i-1)/(2N))`,
//! or equally spaced positions with weights equal to the profile mass of each
//! Voronoi cell. In 2D the particles sit on a regular grid and carry the mass
//! of their rectangular cell.

use crate::error::{Error, Result};
use crate::exact::{erf, Barenblatt, ReferenceSolution};
use crate::particles::ParticleSystem;

/// Continuum initial profiles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProfileSpec {
    /// Heat kernel at time `t0` (variance `2 t0`).
    GaussianHeat {
        t0: f64,
    },
    /// Barenblatt profile at time `t0`.
    Barenblatt {
        m: f64,
        t0: f64,
    },
    /// Two equal heat kernels centred at `±2`.
    TwoBump {
        t0: f64,
    },
    Uniform {
        a: f64,
        b: f64,
    },
    /// Radial 2D heat kernel `(4π t0)^{-1} e^{-|x|²/(4 t0)}`.
    Gaussian2D {
        t0: f64,
    },
}

const BUMP_CENTER: f64 = 2.0;

impl ProfileSpec {
    fn reference(&self) -> Result<Option<ReferenceSolution>> {
        Ok(match *self {
            ProfileSpec::GaussianHeat { t0 } | ProfileSpec::TwoBump { t0 } => {
                Some(ReferenceSolution::heat(t0)?)
            }
            ProfileSpec::Barenblatt { m, t0 } => Some(ReferenceSolution::barenblatt(m, t0)?),
            ProfileSpec::Uniform { a, b } => {
                if !(a < b && a.is_finite() && b.is_finite()) {
                    return Err(Error::InvalidParameter(format!(
                        "uniform interval [{a}, {b}]"
                    )));
                }
                None
            }
            ProfileSpec::Gaussian2D { t0 } => {
                ReferenceSolution::heat(t0)?;
                None
            }
        })
    }

    pub fn dim(&self) -> usize {
        match self {
            ProfileSpec::Gaussian2D { .. } => 2,
            _ => 1,
        }
    }

    /// Density `ρ_0(x)` (1D profiles only).
    pub fn density(&self, x: f64) -> Result<f64> {
        let r = self.reference()?;
        Ok(match *self {
            ProfileSpec::GaussianHeat { .. } | ProfileSpec::Barenblatt { .. } => {
                r.expect("1D reference").density(0.0, x)
            }
            ProfileSpec::TwoBump { .. } => {
                let r = r.expect("1D reference");
                0.5 * (r.density(0.0, x + BUMP_CENTER) + r.density(0.0, x - BUMP_CENTER))
            }
            ProfileSpec::Uniform { a, b } => {
                if (a..=b).contains(&x) {
                    1.0 / (b - a)
                } else {
                    0.0
                }
            }
            ProfileSpec::Gaussian2D { .. } => return Err(Error::UnsupportedDimension(2)),
        })
    }

    /// Cumulative distribution `F_0(x)`.
    pub fn cdf(&self, x: f64) -> Result<f64> {
        let r = self.reference()?;
        Ok(match *self {
            ProfileSpec::GaussianHeat { .. } | ProfileSpec::Barenblatt { .. } => {
                r.expect("1D reference").cdf(0.0, x)
            }
            ProfileSpec::TwoBump { .. } => {
                let r = r.expect("1D reference");
                0.5 * (r.cdf(0.0, x + BUMP_CENTER) + r.cdf(0.0, x - BUMP_CENTER))
            }
            ProfileSpec::Uniform { a, b } => ((x - a) / (b - a)).clamp(0.0, 1.0),
            ProfileSpec::Gaussian2D { .. } => return Err(Error::UnsupportedDimension(2)),
        })
    }

    /// Pseudo-inverse `Φ_0(ε)`, where a closed form exists.
    pub fn quantile(&self, eps: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&eps) {
            return Err(Error::DomainError(format!("quantile level {eps}")));
        }
        let r = self.reference()?;
        let x = match *self {
            ProfileSpec::GaussianHeat { .. } | ProfileSpec::Barenblatt { .. } => {
                r.expect("1D reference").quantile(0.0, eps)
            }
            ProfileSpec::Uniform { a, b } => a + eps * (b - a),
            ProfileSpec::TwoBump { .. } => {
                return Err(Error::QuantileUnavailable("two-bump profile"))
            }
            ProfileSpec::Gaussian2D { .. } => return Err(Error::UnsupportedDimension(2)),
        };
        if x.is_infinite() {
            return Err(Error::UnboundedQuantile(eps));
        }
        Ok(x)
    }
}

/// Support edge `k_0 = t0^α √(K/κ)` of the initial Barenblatt profile.
pub fn barenblatt_support(m: f64, t0: f64) -> Result<f64> {
    Ok(Barenblatt::new(m, t0)?.support_edge(0.0))
}

fn check_count(n: usize) -> Result<()> {
    if n < 2 {
        Err(Error::TooFewParticles(n))
    } else {
        Ok(())
    }
}

/// Equal weights `1/N` at `x_i = Φ_0((2i - 1) / (2N))`.
pub fn init_equal_weights(profile: &ProfileSpec, n: usize) -> Result<ParticleSystem> {
    check_count(n)?;
    let positions = (1..=n)
        .map(|i| profile.quantile((2 * i - 1) as f64 / (2 * n) as f64))
        .collect::<Result<Vec<_>>>()?;
    ParticleSystem::new(1, positions, vec![1.0 / n as f64; n])
}

/// Equally spaced particles on `interval = [x_1, x_N]`, weighted by the profile
/// mass between neighbouring midpoints (the end particles also take the tails).
///
/// With `end_weight`, both end weights are replaced by that value and the
/// whole vector is rescaled to sum to one.
pub fn init_equal_spacing(
    profile: &ProfileSpec,
    n: usize,
    interval: (f64, f64),
    end_weight: Option<f64>,
) -> Result<ParticleSystem> {
    check_count(n)?;
    let (lo, hi) = interval;
    if !(lo < hi && lo.is_finite() && hi.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "initial interval [{lo}, {hi}]"
        )));
    }
    let h = (hi - lo) / (n - 1) as f64;
    let positions: Vec<f64> = (0..n)
        .map(|i| if i + 1 == n { hi } else { lo + i as f64 * h })
        .collect();
    let cuts = positions
        .windows(2)
        .map(|p| profile.cdf(0.5 * (p[0] + p[1])))
        .collect::<Result<Vec<_>>>()?;

    let mut weights = Vec::with_capacity(n);
    weights.push(cuts[0]);
    weights.extend(cuts.windows(2).map(|c| c[1] - c[0]));
    weights.push(1.0 - cuts[n - 2]);

    if let Some(index) = weights.iter().position(|&w| w <= 0.0) {
        return Err(Error::ZeroWeight { index });
    }
    if let Some(e) = end_weight {
        if !(e > 0.0 && e < 0.5) {
            return Err(Error::InvalidParameter(format!("end weight {e}")));
        }
        weights[0] = e;
        weights[n - 1] = e;
        let total: f64 = weights.iter().sum();
        for w in &mut weights {
            *w /= total;
        }
    }
    ParticleSystem::new(1, positions, weights)
}

/// `n × n` grid on `[-half_width, half_width]²` for the 2D heat kernel at `t0`.
///
/// Each weight is the exact Gaussian mass of the particle's rectangular cell
/// (boundary cells stop half a spacing outside the grid), renormalised to one.
pub fn init_grid_2d(t0: f64, n: usize, half_width: f64) -> Result<ParticleSystem> {
    if n < 2 {
        return Err(Error::TooFewParticles(n * n));
    }
    if !(t0 > 0.0 && t0.is_finite()) {
        return Err(Error::InvalidParameter(format!("t0 = {t0}")));
    }
    if !(half_width > 0.0 && half_width.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "grid half width {half_width}"
        )));
    }
    let h = 2.0 * half_width / (n - 1) as f64;
    let nodes: Vec<f64> = (0..n).map(|k| -half_width + k as f64 * h).collect();
    let scale = (4.0 * t0).sqrt();
    let cell_mass: Vec<f64> = nodes
        .iter()
        .map(|&c| 0.5 * (erf((c + 0.5 * h) / scale) - erf((c - 0.5 * h) / scale)))
        .collect();

    let mut positions = Vec::with_capacity(2 * n * n);
    let mut weights = Vec::with_capacity(n * n);
    for (i, &x) in nodes.iter().enumerate() {
        for (j, &y) in nodes.iter().enumerate() {
            positions.push(x);
            positions.push(y);
            weights.push(cell_mass[i] * cell_mass[j]);
        }
    }
    if let Some(index) = weights.iter().position(|&w| w <= 0.0) {
        return Err(Error::ZeroWeight { index });
    }
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }
    ParticleSystem::new(2, positions, weights)
}
