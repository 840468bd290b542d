//! Energy densities: internal energy `H`, confinement `V`, interaction `W`.

use crate::error::{Error, Result};

/// Smoothing exponent used throughout unless stated otherwise.
pub const DEFAULT_P: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Internal {
    None,
    /// `H(ρ) = ρ log ρ`
    Entropy,
    /// `H(ρ) = ρ^m / (m - 1)`
    PowerLaw {
        m: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Confinement {
    None,
    /// `V(x) = coefficient · |x|² / 2`
    Quadratic {
        coefficient: f64,
    },
    /// `V(x) = |x|^k / k`
    Power {
        k: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Interaction {
    None,
    /// `W(x) = 2χ log|x|`, `W(0) := 0`
    LogAttraction {
        chi: f64,
    },
    /// `W(x) = -c max(1 - |x|, 0) + c`
    CompactTent {
        c: f64,
    },
    /// `W(x) = coefficient · |x|² / 2`
    Quadratic {
        coefficient: f64,
    },
}

impl Internal {
    /// `H(ρ)`.
    pub fn density(&self, rho: f64) -> f64 {
        match *self {
            Internal::None => 0.0,
            Internal::Entropy => {
                if rho == 0.0 {
                    0.0
                } else {
                    rho * rho.ln()
                }
            }
            Internal::PowerLaw { m } => rho.powf(m) / (m - 1.0),
        }
    }

    /// `h(λ) = λ^d H(λ^{-d})`, convex and non-increasing for admissible `H`.
    pub fn h_aux(&self, lambda: f64, dim: usize) -> f64 {
        let ld = lambda.powi(dim as i32);
        ld * self.density(1.0 / ld)
    }

    /// `vol · H(w / vol)`: internal energy of a particle of mass `w` spread on `vol`.
    pub fn term(&self, w: f64, vol: f64) -> f64 {
        match *self {
            Internal::None => 0.0,
            Internal::Entropy => w * (w / vol).ln(),
            Internal::PowerLaw { m } => w.powf(m) * vol.powf(1.0 - m) / (m - 1.0),
        }
    }

    /// `d/dvol [vol · H(w / vol)] = H(ρ) - ρ H'(ρ)` with `ρ = w / vol`.
    pub fn term_dvol(&self, w: f64, vol: f64) -> f64 {
        let rho = w / vol;
        match *self {
            Internal::None => 0.0,
            Internal::Entropy => -rho,
            Internal::PowerLaw { m } => -rho.powf(m),
        }
    }
}

impl Confinement {
    pub fn value(&self, x: &[f64]) -> f64 {
        match *self {
            Confinement::None => 0.0,
            Confinement::Quadratic { coefficient } => 0.5 * coefficient * norm_sq(x),
            Confinement::Power { k } => norm_sq(x).sqrt().powf(k) / k,
        }
    }

    /// Adds `∇V(x)` scaled by `scale` into `out`.
    pub fn add_gradient(&self, x: &[f64], scale: f64, out: &mut [f64]) {
        match *self {
            Confinement::None => {}
            Confinement::Quadratic { coefficient } => {
                for (o, xk) in out.iter_mut().zip(x) {
                    *o += scale * coefficient * xk;
                }
            }
            Confinement::Power { k } => {
                let r = norm_sq(x).sqrt();
                if r == 0.0 {
                    return;
                }
                let f = r.powf(k - 2.0);
                for (o, xk) in out.iter_mut().zip(x) {
                    *o += scale * f * xk;
                }
            }
        }
    }

    pub fn is_none(&self) -> bool {
        matches!(self, Confinement::None)
    }
}

impl Interaction {
    /// `W(z)` for `z = x_i - x_j`; zero at the origin.
    pub fn value(&self, z: &[f64]) -> f64 {
        let r = norm_sq(z).sqrt();
        match *self {
            Interaction::None => 0.0,
            Interaction::LogAttraction { chi } => {
                if r == 0.0 {
                    0.0
                } else {
                    2.0 * chi * r.ln()
                }
            }
            Interaction::CompactTent { c } => -c * (1.0 - r).max(0.0) + c,
            Interaction::Quadratic { coefficient } => 0.5 * coefficient * r * r,
        }
    }

    /// Radial derivative factor `f` with `∇W(z) = f · z`.
    pub fn gradient_factor(&self, z: &[f64]) -> f64 {
        let r2 = norm_sq(z);
        match *self {
            Interaction::None => 0.0,
            Interaction::LogAttraction { chi } => {
                if r2 == 0.0 {
                    0.0
                } else {
                    2.0 * chi / r2
                }
            }
            Interaction::CompactTent { c } => {
                let r = r2.sqrt();
                // one-sided: slope c inside the support, flat at |z| >= 1 and at 0
                if r > 0.0 && r < 1.0 {
                    c / r
                } else {
                    0.0
                }
            }
            Interaction::Quadratic { coefficient } => coefficient,
        }
    }

    pub fn is_none(&self) -> bool {
        matches!(self, Interaction::None)
    }

    /// Potentials that blow up at the origin.
    pub fn is_singular(&self) -> bool {
        matches!(self, Interaction::LogAttraction { .. })
    }
}

fn norm_sq(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

/// Full description of the discrete energy driving the flow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergySpec {
    pub internal: Internal,
    pub confinement: Confinement,
    pub interaction: Interaction,
    /// Softmin exponent used for the ball radii.
    pub p: f64,
}

impl Default for EnergySpec {
    fn default() -> Self {
        Self {
            internal: Internal::None,
            confinement: Confinement::None,
            interaction: Interaction::None,
            p: DEFAULT_P,
        }
    }
}

impl EnergySpec {
    pub fn new(internal: Internal, confinement: Confinement, interaction: Interaction) -> Self {
        Self {
            internal,
            confinement,
            interaction,
            p: DEFAULT_P,
        }
    }

    /// Heat equation: entropy only.
    pub fn heat() -> Self {
        Self::new(Internal::Entropy, Confinement::None, Interaction::None)
    }

    pub fn with_p(mut self, p: f64) -> Self {
        self.p = p;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !(self.p.is_finite() && self.p > 0.0) {
            return bad(format!("p must be finite and positive, got {}", self.p));
        }
        if let Internal::PowerLaw { m } = self.internal {
            if !(m.is_finite() && m > 1.0) {
                return bad(format!("power-law exponent m must exceed 1, got {m}"));
            }
        }
        match self.confinement {
            Confinement::Quadratic { coefficient }
                if !(coefficient.is_finite() && coefficient > 0.0) =>
            {
                return bad(format!(
                    "confinement coefficient must be positive, got {coefficient}"
                ));
            }
            Confinement::Power { k } if !(k.is_finite() && k >= 1.0) => {
                return bad(format!(
                    "confinement exponent k must be at least 1, got {k}"
                ));
            }
            _ => {}
        }
        match self.interaction {
            Interaction::LogAttraction { chi } if !(chi.is_finite() && chi > 0.0) => {
                bad(format!("chi must be positive, got {chi}"))
            }
            Interaction::CompactTent { c } if !(c.is_finite() && c > 0.0) => {
                bad(format!("tent height c must be positive, got {c}"))
            }
            Interaction::Quadratic { coefficient } if !coefficient.is_finite() => bad(format!(
                "interaction coefficient must be finite, got {coefficient}"
            )),
            _ => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn internal_terms() {
        assert_eq!(Internal::Entropy.term(0.5, 0.5), 0.0);
        assert!((Internal::PowerLaw { m: 2.0 }.term(0.5, 0.25) - 1.0).abs() < 1e-15);
        assert!((Internal::Entropy.term(0.5, 1.0) + 0.346_573_590_279_972_6).abs() < 1e-15);
        assert_eq!(Internal::None.term(0.5, 1.0), 0.0);
    }

    #[test]
    fn term_derivative_matches_difference() {
        for kind in [Internal::Entropy, Internal::PowerLaw { m: 2.5 }] {
            let (w, v) = (0.13, 0.4);
            let h = 1e-6;
            let fd = (kind.term(w, v + h) - kind.term(w, v - h)) / (2.0 * h);
            assert!((fd - kind.term_dvol(w, v)).abs() < 1e-8 * fd.abs().max(1.0));
        }
    }

    #[test]
    fn h_aux_is_convex_and_nonincreasing() {
        for kind in [
            Internal::Entropy,
            Internal::PowerLaw { m: 2.0 },
            Internal::PowerLaw { m: 3.0 },
        ] {
            for dim in [1, 2] {
                let xs: Vec<f64> = (1..60).map(|k| 0.05 * k as f64).collect();
                let hs: Vec<f64> = xs.iter().map(|&l| kind.h_aux(l, dim)).collect();
                for w in hs.windows(3) {
                    assert!(w[1] <= w[0] + 1e-12);
                    assert!(w[0] + w[2] - 2.0 * w[1] >= -1e-12);
                }
            }
        }
    }

    #[test]
    fn potentials_vanish_at_origin() {
        assert_eq!(Interaction::LogAttraction { chi: 1.0 }.value(&[0.0]), 0.0);
        assert_eq!(Interaction::CompactTent { c: 8.0 }.value(&[0.0]), 0.0);
        assert_eq!(Interaction::CompactTent { c: 8.0 }.value(&[1.5]), 8.0);
        assert_eq!(
            Interaction::CompactTent { c: 8.0 }.gradient_factor(&[1.0]),
            0.0
        );
        assert_eq!(Interaction::LogAttraction { chi: 0.7 }.value(&[1.0]), 0.0);
    }

    #[test]
    fn validation() {
        assert!(EnergySpec::heat().validate().is_ok());
        assert!(EnergySpec::heat().with_p(0.0).validate().is_err());
        assert!(EnergySpec::new(
            Internal::PowerLaw { m: 1.0 },
            Confinement::None,
            Interaction::None
        )
        .validate()
        .is_err());
        assert!(EnergySpec::new(
            Internal::Entropy,
            Confinement::None,
            Interaction::LogAttraction { chi: -1.0 }
        )
        .validate()
        .is_err());
    }
}
