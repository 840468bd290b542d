//! Explicit Euler stepping of the particle flow `dx/dt = -∇_w E(x)`.

use crate::energy::{discrete_energy, weighted_gradient};
use crate::error::{Error, Result};
use crate::exact::ReferenceSolution;
use crate::metrics::{discrete_entropy, second_moment, wasserstein_error, MetricSeries};
use crate::model::EnergySpec;
use crate::particles::ParticleSystem;
use crate::softmin;

/// Fixed steps land on a stop time when they would overshoot it by less than
/// this fraction of `dt`.
const LANDING_FRACTION: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepMode {
    Fixed {
        dt: f64,
    },
    /// Step shrinks so no particle travels more than `delta` times its local
    /// gap; the run stops as a blow-up once it falls below `dt_min`.
    Adaptive {
        delta: f64,
        dt_init: f64,
        dt_min: f64,
    },
}

impl StepMode {
    pub const DEFAULT_DELTA: f64 = 0.25;
    pub const DEFAULT_DT_INIT: f64 = 1e-5;
    pub const DEFAULT_DT_MIN: f64 = 1e-7;

    pub fn adaptive() -> Self {
        Self::Adaptive {
            delta: Self::DEFAULT_DELTA,
            dt_init: Self::DEFAULT_DT_INIT,
            dt_min: Self::DEFAULT_DT_MIN,
        }
    }
}

/// When to record a snapshot. The initial and final states are always kept.
#[derive(Debug, Clone, PartialEq)]
pub enum SnapshotPolicy {
    /// Initial and final state only.
    Ends,
    EverySteps(usize),
    /// Every multiple of the interval; steps are shortened to land on them.
    EveryTime(f64),
    /// Explicit times in `(0, T)`; steps are shortened to land on them.
    AtTimes(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepControl {
    pub mode: StepMode,
    pub final_time: f64,
    pub snapshots: SnapshotPolicy,
    /// Fixed steps must satisfy `dt <= C / N²`; `None` lifts the check.
    pub cfl_constant: Option<f64>,
}

impl StepControl {
    pub const DEFAULT_CFL_CONSTANT: f64 = 1.0;

    pub fn fixed(dt: f64, final_time: f64) -> Self {
        Self {
            mode: StepMode::Fixed { dt },
            final_time,
            snapshots: SnapshotPolicy::Ends,
            cfl_constant: Some(Self::DEFAULT_CFL_CONSTANT),
        }
    }

    pub fn adaptive(final_time: f64) -> Self {
        Self {
            mode: StepMode::adaptive(),
            final_time,
            snapshots: SnapshotPolicy::Ends,
            cfl_constant: None,
        }
    }

    pub fn with_snapshots(mut self, snapshots: SnapshotPolicy) -> Self {
        self.snapshots = snapshots;
        self
    }

    pub fn without_cfl_check(mut self) -> Self {
        self.cfl_constant = None;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.final_time.is_finite() && self.final_time >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "final time must be non-negative, got {}",
                self.final_time
            )));
        }
        match self.mode {
            StepMode::Fixed { dt } => {
                if !(dt.is_finite() && dt > 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "time step must be positive, got {dt}"
                    )));
                }
            }
            StepMode::Adaptive {
                delta,
                dt_init,
                dt_min,
            } => {
                if !(delta > 0.0 && delta < 1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "delta must lie in (0, 1), got {delta}"
                    )));
                }
                if !(dt_min > 0.0 && dt_min < dt_init && dt_init.is_finite()) {
                    return Err(Error::InvalidParameter(format!(
                        "need 0 < dt_min < dt_init, got dt_min = {dt_min}, dt_init = {dt_init}"
                    )));
                }
            }
        }
        match &self.snapshots {
            SnapshotPolicy::EverySteps(0) => {
                return Err(Error::InvalidParameter(
                    "snapshot step interval must be positive".into(),
                ))
            }
            SnapshotPolicy::EveryTime(tau) if !(tau.is_finite() && *tau > 0.0) => {
                return Err(Error::InvalidParameter(format!(
                    "snapshot time interval must be positive, got {tau}"
                )))
            }
            SnapshotPolicy::AtTimes(ts) if ts.iter().any(|t| !t.is_finite()) => {
                return Err(Error::NonFinite("snapshot times"))
            }
            _ => {}
        }
        if let Some(c) = self.cfl_constant {
            if !(c.is_finite() && c > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "CFL constant must be positive, got {c}"
                )));
            }
        }
        Ok(())
    }
}

/// `C / N²`.
pub fn cfl_suggestion(n: usize, c: f64) -> f64 {
    c / (n as f64 * n as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StopReason {
    ReachedFinalTime,
    /// The adaptive step collapsed below its floor at time `t`.
    BlowUp {
        t: f64,
    },
    /// Two particles crossed or met at time `t`; the state before the step is kept.
    OrderingViolated {
        t: f64,
    },
}

impl StopReason {
    pub fn name(&self) -> &'static str {
        match self {
            Self::ReachedFinalTime => "ReachedFinalTime",
            Self::BlowUp { .. } => "BlowUp",
            Self::OrderingViolated { .. } => "OrderingViolated",
        }
    }

    pub fn time(&self) -> Option<f64> {
        match *self {
            Self::ReachedFinalTime => None,
            Self::BlowUp { t } | Self::OrderingViolated { t } => Some(t),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub system: ParticleSystem,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub snapshots: Vec<Snapshot>,
    pub metrics: MetricSeries,
    pub stop_reason: StopReason,
    pub steps: usize,
    /// Step sizes actually taken, in order.
    pub step_sizes: Vec<f64>,
    /// Current adaptive step `Δ_n t` when the run ended (the fixed `dt` otherwise).
    pub last_dt: f64,
}

impl SimResult {
    pub fn final_system(&self) -> &ParticleSystem {
        &self
            .snapshots
            .last()
            .expect("a run records its initial state")
            .system
    }

    pub fn final_time(&self) -> f64 {
        self.snapshots
            .last()
            .expect("a run records its initial state")
            .t
    }

    /// Snapshot recorded at time `t` (within `1e-9`).
    pub fn snapshot_at(&self, t: f64) -> Option<&Snapshot> {
        self.snapshots.iter().find(|s| (s.t - t).abs() < 1e-9)
    }

    /// Fill `metrics.errors` with the Wasserstein error of every snapshot.
    pub fn attach_errors(&mut self, reference: &ReferenceSolution) -> Result<()> {
        let errors = self
            .snapshots
            .iter()
            .map(|s| wasserstein_error(&s.system, reference, s.t))
            .collect::<Result<Vec<_>>>()?;
        self.metrics.errors = Some(errors);
        Ok(())
    }
}

/// One explicit Euler step `x - dt ∇_w E(x)`.
pub fn step_explicit(sys: &ParticleSystem, spec: &EnergySpec, dt: f64) -> Result<ParticleSystem> {
    let grad = weighted_gradient(sys, spec)?;
    advance(sys, &grad, dt)
}

fn advance(sys: &ParticleSystem, grad: &[f64], dt: f64) -> Result<ParticleSystem> {
    let next = sys
        .positions()
        .iter()
        .zip(grad)
        .map(|(x, g)| x - dt * g)
        .collect();
    sys.with_positions(next)
}

/// Run with whichever step mode `control` selects.
pub fn run(sys0: &ParticleSystem, spec: &EnergySpec, control: &StepControl) -> Result<SimResult> {
    match control.mode {
        StepMode::Fixed { .. } => run_fixed(sys0, spec, control),
        StepMode::Adaptive { .. } => run_adaptive(sys0, spec, control),
    }
}

pub fn run_fixed(
    sys0: &ParticleSystem,
    spec: &EnergySpec,
    control: &StepControl,
) -> Result<SimResult> {
    let StepMode::Fixed { dt } = control.mode else {
        return Err(Error::InvalidParameter(
            "run_fixed needs a fixed step".into(),
        ));
    };
    control.validate()?;
    if let Some(c) = control.cfl_constant {
        let limit = cfl_suggestion(sys0.len(), c);
        if dt > limit * (1.0 + 1e-12) {
            return Err(Error::CflExceeded { dt, limit });
        }
    }
    Runner::new(sys0, spec, control, dt)?.drive(|_, _, _| Ok(Some(dt)))
}

/// Adaptive stepping in 1D: with `v_i` the particle velocity,
/// `Δ_n t = min(Δ_{n-1} t, min_i δ softmin_p(Δx_i, Δx_{i+1}) / |v_i|)`.
/// The step never grows back.
pub fn run_adaptive(
    sys0: &ParticleSystem,
    spec: &EnergySpec,
    control: &StepControl,
) -> Result<SimResult> {
    let StepMode::Adaptive {
        delta,
        dt_init,
        dt_min,
    } = control.mode
    else {
        return Err(Error::InvalidParameter(
            "run_adaptive needs an adaptive step".into(),
        ));
    };
    control.validate()?;
    if sys0.dim() != 1 {
        return Err(Error::UnsupportedDimension(sys0.dim()));
    }
    let p = spec.p;
    Runner::new(sys0, spec, control, dt_init)?.drive(|sys, grad, dt_n| {
        let gaps = sys.gaps();
        for (i, g) in grad.iter().enumerate() {
            let speed = g.abs();
            if speed > 0.0 {
                let local = delta * softmin::pair(gaps[i], gaps[i + 1], p) / speed;
                *dt_n = dt_n.min(local);
            }
        }
        Ok((*dt_n >= dt_min).then_some(*dt_n))
    })
}

struct Runner<'a> {
    spec: &'a EnergySpec,
    control: &'a StepControl,
    sys: ParticleSystem,
    t: f64,
    dt: f64,
    result: SimResult,
    stops: Vec<f64>,
}

impl<'a> Runner<'a> {
    fn new(
        sys0: &ParticleSystem,
        spec: &'a EnergySpec,
        control: &'a StepControl,
        dt: f64,
    ) -> Result<Self> {
        spec.validate()?;
        let big_t = control.final_time;
        let mut stops: Vec<f64> = match &control.snapshots {
            SnapshotPolicy::EveryTime(tau) => {
                let count = (big_t / tau).floor() as usize;
                (1..=count).map(|k| k as f64 * tau).collect()
            }
            SnapshotPolicy::AtTimes(ts) => ts.clone(),
            _ => Vec::new(),
        };
        stops.retain(|&s| s > 0.0 && s < big_t * (1.0 - 1e-12));
        stops.push(big_t);
        stops.sort_by(f64::total_cmp);
        stops.dedup();
        // Pending stops are popped from the back.
        stops.reverse();

        let mut runner = Self {
            spec,
            control,
            sys: sys0.clone(),
            t: 0.0,
            dt,
            result: SimResult {
                snapshots: Vec::new(),
                metrics: MetricSeries::default(),
                stop_reason: StopReason::ReachedFinalTime,
                steps: 0,
                step_sizes: Vec::new(),
                last_dt: dt,
            },
            stops,
        };
        runner.record()?;
        Ok(runner)
    }

    fn record(&mut self) -> Result<()> {
        let energy = discrete_energy(&self.sys, self.spec)?;
        let entropy = discrete_entropy(&self.sys, self.spec.p)?;
        self.result
            .metrics
            .push(self.t, energy, second_moment(&self.sys), entropy);
        self.result.snapshots.push(Snapshot {
            t: self.t,
            system: self.sys.clone(),
        });
        Ok(())
    }

    /// `choose` sees the state, its weighted gradient and the running step;
    /// it returns the step to attempt or `None` to stop with a blow-up.
    fn drive<F>(mut self, mut choose: F) -> Result<SimResult>
    where
        F: FnMut(&ParticleSystem, &[f64], &mut f64) -> Result<Option<f64>>,
    {
        let big_t = self.control.final_time;
        if big_t == 0.0 {
            return Ok(self.result);
        }
        let fixed = matches!(self.control.mode, StepMode::Fixed { .. });
        loop {
            let grad = match weighted_gradient(&self.sys, self.spec) {
                Ok(g) => g,
                Err(Error::CoincidentParticles { .. }) => {
                    let t = self.t;
                    return self.finish(StopReason::OrderingViolated { t });
                }
                Err(e) => return Err(e),
            };
            let Some(step) = choose(&self.sys, &grad, &mut self.dt)? else {
                let t = self.t;
                return self.finish(StopReason::BlowUp { t });
            };
            let stop = *self.stops.last().expect("final time is always pending");
            let remaining = stop - self.t;
            let lands = if fixed {
                step >= remaining - LANDING_FRACTION * step
            } else {
                step >= remaining
            };
            let h = if lands { remaining } else { step };

            match advance(&self.sys, &grad, h) {
                Ok(next) => self.sys = next,
                Err(Error::OrderingViolated { .. } | Error::CoincidentParticles { .. }) => {
                    let t = self.t;
                    return self.finish(StopReason::OrderingViolated { t });
                }
                Err(e) => return Err(e),
            }
            self.result.steps += 1;
            self.result.step_sizes.push(h);
            if lands {
                self.t = stop;
                self.stops.pop();
            } else {
                self.t += h;
            }

            let at_end = self.stops.is_empty();
            let cadence = match self.control.snapshots {
                SnapshotPolicy::EverySteps(k) => self.result.steps % k == 0,
                _ => lands,
            };
            if cadence || at_end {
                self.record()?;
            }
            if at_end {
                return self.finish(StopReason::ReachedFinalTime);
            }
        }
    }

    fn finish(mut self, reason: StopReason) -> Result<SimResult> {
        let last = self.result.snapshots.last().map(|s| s.t);
        if reason != StopReason::ReachedFinalTime && last != Some(self.t) {
            self.record()?;
        }
        self.result.stop_reason = reason;
        self.result.last_dt = self.dt;
        Ok(self.result)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Confinement, Interaction, Internal};

    fn five() -> ParticleSystem {
        ParticleSystem::from_1d(&[-1.0, -0.4, 0.1, 0.5, 1.2], &[0.2; 5]).unwrap()
    }

    #[test]
    fn quadratic_drift_contracts() {
        let sys = five();
        let spec = EnergySpec::new(
            Internal::None,
            Confinement::Quadratic { coefficient: 1.0 },
            Interaction::None,
        );
        let next = step_explicit(&sys, &spec, 0.01).unwrap();
        for (a, b) in sys.positions().iter().zip(next.positions()) {
            assert!((b - 0.99 * a).abs() < 1e-15);
        }
        assert_eq!(next.weights(), sys.weights());
    }

    #[test]
    fn zero_spec_is_identity() {
        let sys = five();
        let next = step_explicit(&sys, &EnergySpec::default(), 0.1).unwrap();
        assert_eq!(next, sys);
    }

    #[test]
    fn entropy_pair_spreads() {
        let sys = ParticleSystem::from_1d(&[-0.3, 0.3], &[0.5, 0.5]).unwrap();
        let next = step_explicit(&sys, &EnergySpec::heat(), 1e-3).unwrap();
        assert!(next.positions()[1] - next.positions()[0] > 0.6);
    }

    #[test]
    fn cfl_values() {
        assert!((cfl_suggestion(50, 0.1) - 4e-5).abs() < 1e-20);
        assert!((cfl_suggestion(10, 0.1) - 1e-3).abs() < 1e-18);
        assert_eq!(cfl_suggestion(20, 0.1), 4.0 * cfl_suggestion(40, 0.1));
    }

    #[test]
    fn empty_run() {
        let sys = five();
        let res = run(&sys, &EnergySpec::heat(), &StepControl::fixed(1e-3, 0.0)).unwrap();
        assert_eq!(res.snapshots.len(), 1);
        assert_eq!(res.stop_reason, StopReason::ReachedFinalTime);
        assert_eq!(res.steps, 0);
    }

    #[test]
    fn fixed_run_lands_on_final_time() {
        let sys = five();
        let control = StepControl::fixed(0.003, 0.01).without_cfl_check();
        let res = run(&sys, &EnergySpec::heat(), &control).unwrap();
        assert_eq!(res.final_time(), 0.01);
        assert_eq!(res.steps, 4);
        assert_eq!(res.snapshots.len(), 2);
    }

    #[test]
    fn snapshot_times_are_hit() {
        let sys = five();
        let control = StepControl::fixed(0.003, 0.02)
            .without_cfl_check()
            .with_snapshots(SnapshotPolicy::EveryTime(0.005));
        let res = run(&sys, &EnergySpec::heat(), &control).unwrap();
        let times: Vec<f64> = res.snapshots.iter().map(|s| s.t).collect();
        assert_eq!(times.len(), 5);
        for (k, t) in times.iter().enumerate() {
            assert!((t - 0.005 * k as f64).abs() < 1e-15);
        }
        assert_eq!(res.metrics.len(), 5);
    }

    #[test]
    fn cfl_violation_is_rejected() {
        let sys = five();
        let err = run(&sys, &EnergySpec::heat(), &StepControl::fixed(0.1, 1.0)).unwrap_err();
        assert!(matches!(err, Error::CflExceeded { .. }));
    }

    #[test]
    fn oversized_step_reports_crossing() {
        let sys = five();
        let control = StepControl::fixed(1.0, 10.0).without_cfl_check();
        let res = run(&sys, &EnergySpec::heat(), &control).unwrap();
        assert!(matches!(res.stop_reason, StopReason::OrderingViolated { t } if t == 0.0));
        assert_eq!(res.snapshots.len(), 1);
    }

    #[test]
    fn adaptive_zero_field_keeps_step() {
        let sys = five();
        let res = run(&sys, &EnergySpec::default(), &StepControl::adaptive(1e-3)).unwrap();
        assert_eq!(res.stop_reason, StopReason::ReachedFinalTime);
        assert_eq!(res.last_dt, StepMode::DEFAULT_DT_INIT);
        assert_eq!(res.steps, 100);
    }

    #[test]
    fn adaptive_step_never_grows() {
        let sys = five();
        let spec = EnergySpec::new(
            Internal::Entropy,
            Confinement::None,
            Interaction::LogAttraction { chi: 1.5 },
        );
        let res = run(&sys, &spec, &StepControl::adaptive(0.05)).unwrap();
        let trace: Vec<f64> = res
            .step_sizes
            .iter()
            .take(res.step_sizes.len().saturating_sub(1))
            .copied()
            .collect();
        assert!(trace.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn adaptive_needs_1d() {
        let sys = ParticleSystem::new(2, vec![0.0, 0.0, 1.0, 0.0, 0.0, 1.0], vec![1.0; 3]).unwrap();
        let err = run(&sys, &EnergySpec::heat(), &StepControl::adaptive(0.1)).unwrap_err();
        assert_eq!(err, Error::UnsupportedDimension(2));
    }
}
