use super::special::{beta, erf, erfinv, inv_reg_inc_beta, ln_gamma, reg_inc_beta};
use crate::error::{Error, Result};
use std::f64::consts::PI;

/// Self-similar Barenblatt solution of `ρ_t = (ρ^m)_xx`:
/// `ρ(t, x) = s^{-1} ψ(x / s)` with `s = (t + t0)^α`, `ψ(ξ) = (K - κ ξ²)_+^{1/(m-1)}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Barenblatt {
    pub m: f64,
    pub t0: f64,
    pub alpha: f64,
    pub kappa: f64,
    /// Mass normalisation constant `K`.
    pub k: f64,
}

impl Barenblatt {
    pub fn new(m: f64, t0: f64) -> Result<Self> {
        if !(m.is_finite() && m > 1.0) {
            return Err(Error::InvalidParameter(format!(
                "Barenblatt exponent m = {m}"
            )));
        }
        check_t0(t0)?;
        let alpha = 1.0 / (m + 1.0);
        let kappa = (m - 1.0) / (2.0 * m * (m + 1.0));
        let ln_base = ln_gamma(1.0 / (m - 1.0) + 1.5) + 0.5 * kappa.ln()
            - ln_gamma(m / (m - 1.0))
            - ln_gamma(0.5);
        let k = (ln_base * 2.0 * (m - 1.0) / (m + 1.0)).exp();

        // Independent route: K^{1/(m-1) + 1/2} κ^{-1/2} B(1; 1/2, m/(m-1)) = 1.
        let mass =
            (k.ln() * (1.0 / (m - 1.0) + 0.5) - 0.5 * kappa.ln()).exp() * beta(0.5, m / (m - 1.0));
        assert!(
            (mass - 1.0).abs() < 1e-10,
            "Barenblatt constant inconsistent with mass normalisation: {mass}"
        );

        Ok(Self {
            m,
            t0,
            alpha,
            kappa,
            k,
        })
    }

    fn scale(&self, t: f64) -> f64 {
        (t + self.t0).powf(self.alpha)
    }

    /// Right end of the support at time `t`.
    pub fn support_edge(&self, t: f64) -> f64 {
        self.scale(t) * (self.k / self.kappa).sqrt()
    }

    fn b_shape(&self) -> f64 {
        self.m / (self.m - 1.0)
    }
}

/// Closed-form solutions and steady states used for initial data and errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ReferenceSolution {
    /// Heat kernel started at time `t0`.
    Heat {
        t0: f64,
    },
    Barenblatt(Barenblatt),
    /// Standard Gaussian, steady state of `ρ_t = ρ_xx + (xρ)_x`.
    FpLinearSteady,
    /// `A (R² - x²)_+^{1/(m-1)}`, steady state of `ρ_t = (ρ^m)_xx + (xρ)_x`.
    FpNonlinearSteady {
        m: f64,
        a: f64,
        r: f64,
    },
}

fn check_t0(t0: f64) -> Result<()> {
    if t0.is_finite() && t0 > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "t0 must be positive, got {t0}"
        )))
    }
}

/// Gaussian with variance `2s`.
fn gauss_density(s: f64, x: f64) -> f64 {
    (-x * x / (4.0 * s)).exp() / (4.0 * PI * s).sqrt()
}

fn gauss_cdf(s: f64, x: f64) -> f64 {
    0.5 * (1.0 + erf(x / (4.0 * s).sqrt()))
}

fn gauss_quantile(s: f64, eps: f64) -> f64 {
    if eps <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if eps >= 1.0 {
        return f64::INFINITY;
    }
    (4.0 * s).sqrt() * erfinv(2.0 * eps - 1.0).expect("argument inside (-1, 1)")
}

/// CDF of the symmetric profile `c (E² - x²)_+^{b-1}` through `I(x²/E²; 1/2, b)`.
fn compact_cdf(edge: f64, b: f64, x: f64) -> f64 {
    let z = (x * x / (edge * edge)).min(1.0);
    let half = 0.5 * reg_inc_beta(z, 0.5, b).expect("z inside [0, 1]");
    if x >= 0.0 {
        0.5 + half
    } else {
        0.5 - half
    }
}

fn compact_quantile(edge: f64, b: f64, eps: f64) -> f64 {
    let eps = eps.clamp(0.0, 1.0);
    let y = (2.0 * eps - 1.0).abs();
    let z = inv_reg_inc_beta(y, 0.5, b).expect("y inside [0, 1]");
    let x = edge * z.sqrt();
    if eps < 0.5 {
        -x
    } else {
        x
    }
}

impl ReferenceSolution {
    pub fn heat(t0: f64) -> Result<Self> {
        check_t0(t0)?;
        Ok(Self::Heat { t0 })
    }

    pub fn barenblatt(m: f64, t0: f64) -> Result<Self> {
        Ok(Self::Barenblatt(Barenblatt::new(m, t0)?))
    }

    pub fn fp_linear_steady() -> Self {
        Self::FpLinearSteady
    }

    pub fn fp_nonlinear_steady(m: f64) -> Result<Self> {
        if !(m.is_finite() && m > 1.0) {
            return Err(Error::InvalidParameter(format!("exponent m = {m}")));
        }
        let a = ((m - 1.0) / (2.0 * m)).powf(1.0 / (m - 1.0));
        let r = (a * beta(0.5, m / (m - 1.0))).powf((1.0 - m) / (m + 1.0));
        Ok(Self::FpNonlinearSteady { m, a, r })
    }

    pub fn density(&self, t: f64, x: f64) -> f64 {
        match *self {
            Self::Heat { t0 } => gauss_density(t + t0, x),
            Self::FpLinearSteady => gauss_density(0.5, x),
            Self::Barenblatt(b) => {
                let s = b.scale(t);
                let xi = x / s;
                (b.k - b.kappa * xi * xi).max(0.0).powf(1.0 / (b.m - 1.0)) / s
            }
            Self::FpNonlinearSteady { m, a, r } => {
                a * (r * r - x * x).max(0.0).powf(1.0 / (m - 1.0))
            }
        }
    }

    pub fn cdf(&self, t: f64, x: f64) -> f64 {
        match *self {
            Self::Heat { t0 } => gauss_cdf(t + t0, x),
            Self::FpLinearSteady => gauss_cdf(0.5, x),
            Self::Barenblatt(b) => compact_cdf(b.support_edge(t), b.b_shape(), x),
            Self::FpNonlinearSteady { m, r, .. } => compact_cdf(r, m / (m - 1.0), x),
        }
    }

    /// Pseudo-inverse `Φ(t, ε) = inf{x : F(t, x) > ε}`; `±∞` at the ends for Gaussians.
    pub fn quantile(&self, t: f64, eps: f64) -> f64 {
        match *self {
            Self::Heat { t0 } => gauss_quantile(t + t0, eps),
            Self::FpLinearSteady => gauss_quantile(0.5, eps),
            Self::Barenblatt(b) => compact_quantile(b.support_edge(t), b.b_shape(), eps),
            Self::FpNonlinearSteady { m, r, .. } => compact_quantile(r, m / (m - 1.0), eps),
        }
    }

    /// Support `[-edge, edge]` for compactly supported profiles.
    pub fn support(&self, t: f64) -> Option<(f64, f64)> {
        match *self {
            Self::Barenblatt(b) => {
                let e = b.support_edge(t);
                Some((-e, e))
            }
            Self::FpNonlinearSteady { r, .. } => Some((-r, r)),
            _ => None,
        }
    }

    pub fn second_moment(&self, t: f64) -> f64 {
        match *self {
            Self::Heat { t0 } => 2.0 * (t + t0),
            Self::FpLinearSteady => 1.0,
            Self::Barenblatt(b) => {
                // ∫ x² ρ = E² B(3/2, b) / B(1/2, b) with E the support edge
                let e = b.support_edge(t);
                e * e * beta(1.5, b.b_shape()) / beta(0.5, b.b_shape())
            }
            Self::FpNonlinearSteady { m, r, .. } => {
                let b = m / (m - 1.0);
                r * r * beta(1.5, b) / beta(0.5, b)
            }
        }
    }
}
