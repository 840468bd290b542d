#![allow(dead_code)]

use blobflow::energy::discrete_energy;
use blobflow::model::{Confinement, EnergySpec, Interaction, Internal};
use blobflow::ParticleSystem;

/// Positions `start, start + g_0, start + g_0 + g_1, ...`.
pub fn cumulative(start: f64, gaps: &[f64]) -> Vec<f64> {
    let mut x = vec![start];
    for g in gaps {
        x.push(x.last().unwrap() + g);
    }
    x
}

/// Central differences of the total discrete energy, step `h`.
pub fn fd_gradient(sys: &ParticleSystem, spec: &EnergySpec, h: f64) -> Vec<f64> {
    let base = sys.positions().to_vec();
    (0..base.len())
        .map(|k| {
            let mut plus = base.clone();
            let mut minus = base.clone();
            plus[k] += h;
            minus[k] -= h;
            let ep = discrete_energy(&sys.with_positions(plus).unwrap(), spec)
                .unwrap()
                .total;
            let em = discrete_energy(&sys.with_positions(minus).unwrap(), spec)
                .unwrap()
                .total;
            (ep - em) / (2.0 * h)
        })
        .collect()
}

pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, x| a.max(x.abs()))
}

/// Every internal/confinement/interaction combination worth differentiating.
pub fn energy_families() -> Vec<EnergySpec> {
    let internals = [
        Internal::None,
        Internal::Entropy,
        Internal::PowerLaw { m: 2.0 },
        Internal::PowerLaw { m: 3.0 },
    ];
    let confinements = [
        Confinement::None,
        Confinement::Quadratic { coefficient: 1.0 },
        Confinement::Power { k: 4.0 },
    ];
    let interactions = [
        Interaction::None,
        Interaction::LogAttraction { chi: 1.2 },
        Interaction::CompactTent { c: 2.0 },
        Interaction::Quadratic { coefficient: 0.7 },
    ];
    let mut out = Vec::new();
    for i in internals {
        for c in confinements {
            for w in interactions {
                out.push(EnergySpec::new(i, c, w));
            }
        }
    }
    out
}
