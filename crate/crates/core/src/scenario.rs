//! Preset problems and the studies built on them.

use crate::energy::weighted_gradient;
use crate::error::{Error, Result};
use crate::exact::ReferenceSolution;
use crate::init::{
    barenblatt_support, init_equal_spacing, init_equal_weights, init_grid_2d, ProfileSpec,
};
use crate::integrate::{cfl_suggestion, run, SimResult, SnapshotPolicy, StepControl, StopReason};
use crate::metrics::{discrete_error, fit_slope, predicted_moment_slope, velocity_norm};
use crate::model::{Confinement, EnergySpec, Interaction, Internal, DEFAULT_P};
use crate::particles::ParticleSystem;
use std::fmt;
use std::str::FromStr;

/// Start time of the 1D heat and Barenblatt profiles.
pub const T0: f64 = 0.25;
pub const T0_2D: f64 = 0.125;
/// Half width of the square holding the 2D grid.
pub const GRID_HALF_WIDTH: f64 = 2.0;
/// The stabilisation studies compare against the state reached at this time.
pub const STEADY_REFERENCE_TIME: f64 = 6.0;
pub const DEFAULT_CFL: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scenario {
    Heat1d,
    Pme1d,
    FpLinear,
    FpNonlinear,
    Mks,
    MksNl,
    CompactTent,
    Heat2d,
    MksTwoBump,
}

impl Scenario {
    pub const ALL: [Scenario; 9] = [
        Scenario::Heat1d,
        Scenario::Pme1d,
        Scenario::FpLinear,
        Scenario::FpNonlinear,
        Scenario::Mks,
        Scenario::MksNl,
        Scenario::CompactTent,
        Scenario::Heat2d,
        Scenario::MksTwoBump,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Heat1d => "heat1d",
            Scenario::Pme1d => "pme1d",
            Scenario::FpLinear => "fp-linear",
            Scenario::FpNonlinear => "fp-nonlinear",
            Scenario::Mks => "mks",
            Scenario::MksNl => "mks-nl",
            Scenario::CompactTent => "compact-tent",
            Scenario::Heat2d => "heat2d",
            Scenario::MksTwoBump => "mks-twobump",
        }
    }

    pub fn dim(self) -> usize {
        if self == Scenario::Heat2d {
            2
        } else {
            1
        }
    }

    /// Keller–Segel variants, for which a blow-up is an expected outcome.
    pub fn is_keller_segel(self) -> bool {
        matches!(self, Scenario::Mks | Scenario::MksNl | Scenario::MksTwoBump)
    }

    pub fn needs_chi(self) -> bool {
        self.is_keller_segel()
    }

    pub fn needs_m(self) -> bool {
        matches!(
            self,
            Scenario::Pme1d | Scenario::FpNonlinear | Scenario::MksNl | Scenario::CompactTent
        )
    }

    pub fn needs_c(self) -> bool {
        self == Scenario::CompactTent
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown scenario `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Stepping {
    Fixed(f64),
    /// `dt = c / N²`.
    Auto {
        c: f64,
    },
    Adaptive,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitChoice {
    EqualWeights,
    /// `interval = None` uses the scenario's own initial interval.
    EqualSpacing {
        interval: Option<(f64, f64)>,
        end_weight: Option<f64>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub n: usize,
    pub p: f64,
    pub stepping: Stepping,
    pub final_time: f64,
    pub chi: Option<f64>,
    pub m: Option<f64>,
    pub c: Option<f64>,
    /// Coefficient of an added (or replacing) quadratic confinement `k|x|²/2`.
    pub confinement: Option<f64>,
    /// `None` selects the scenario's usual initialisation.
    pub init: Option<InitChoice>,
    pub snapshots: SnapshotPolicy,
    /// Skip the `dt <= N⁻²` sanity bound on fixed steps.
    pub allow_large_dt: bool,
}

impl ScenarioConfig {
    /// Desk-scale defaults. Model parameters (`chi`, `m`, `c`) are left unset.
    pub fn new(scenario: Scenario) -> Self {
        use Scenario::*;
        let (n, final_time, stepping) = match scenario {
            Heat1d | Pme1d => (50, 1.0, Stepping::Auto { c: DEFAULT_CFL }),
            FpLinear | FpNonlinear => (50, 4.0, Stepping::Auto { c: DEFAULT_CFL }),
            Mks | MksTwoBump => (50, 10.0, Stepping::Adaptive),
            MksNl => (50, 4.0, Stepping::Fixed(1e-5)),
            CompactTent => (80, 2.0, Stepping::Fixed(1e-5)),
            Heat2d => (100, 0.5, Stepping::Fixed(1e-4)),
        };
        let cadence = if scenario.is_keller_segel() {
            0.01
        } else {
            0.05
        };
        Self {
            scenario,
            n,
            p: DEFAULT_P,
            stepping,
            final_time,
            chi: None,
            m: None,
            c: None,
            confinement: None,
            init: None,
            snapshots: SnapshotPolicy::EveryTime(cadence),
            allow_large_dt: false,
        }
    }

    pub fn with_n(mut self, n: usize) -> Self {
        self.n = n;
        self
    }

    pub fn with_final_time(mut self, t: f64) -> Self {
        self.final_time = t;
        self
    }

    pub fn with_stepping(mut self, stepping: Stepping) -> Self {
        self.stepping = stepping;
        self
    }

    pub fn with_chi(mut self, chi: f64) -> Self {
        self.chi = Some(chi);
        self
    }

    pub fn with_m(mut self, m: f64) -> Self {
        self.m = Some(m);
        self
    }

    pub fn with_c(mut self, c: f64) -> Self {
        self.c = Some(c);
        self
    }

    pub fn with_confinement(mut self, k: f64) -> Self {
        self.confinement = Some(k);
        self
    }

    pub fn with_init(mut self, init: InitChoice) -> Self {
        self.init = Some(init);
        self
    }

    pub fn with_snapshots(mut self, snapshots: SnapshotPolicy) -> Self {
        self.snapshots = snapshots;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let sc = self.scenario;
        let check = |name: &str, value: Option<f64>, needed: bool| -> Result<()> {
            match (value, needed) {
                (None, true) => Err(Error::InvalidParameter(format!("{sc} requires `{name}`"))),
                (Some(_), false) => Err(Error::InvalidParameter(format!(
                    "{sc} does not use `{name}`"
                ))),
                _ => Ok(()),
            }
        };
        check("chi", self.chi, sc.needs_chi())?;
        check("m", self.m, sc.needs_m())?;
        check("c", self.c, sc.needs_c())?;
        if self.n < 2 {
            return Err(Error::TooFewParticles(self.n));
        }
        if sc.dim() == 2 && grid_side(self.n).is_none() {
            return Err(Error::InvalidParameter(format!(
                "{sc} places particles on a square grid; N = {} is not a perfect square",
                self.n
            )));
        }
        if let Some(k) = self.confinement {
            if !(k.is_finite() && k >= 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "confinement must be non-negative, got {k}"
                )));
            }
        }
        match self.stepping {
            Stepping::Fixed(dt) if !(dt.is_finite() && dt > 0.0) => {
                return Err(Error::InvalidParameter(format!(
                    "dt must be positive, got {dt}"
                )))
            }
            Stepping::Auto { c } if !(c.is_finite() && c > 0.0) => {
                return Err(Error::InvalidParameter(format!(
                    "CFL constant must be positive, got {c}"
                )))
            }
            Stepping::Adaptive if sc.dim() != 1 => {
                return Err(Error::InvalidParameter(format!(
                    "adaptive stepping is 1D only, not {sc}"
                )))
            }
            _ => {}
        }
        if sc.dim() == 2 && self.init.is_some() {
            return Err(Error::InvalidParameter(format!(
                "{sc} only supports its grid initialisation"
            )));
        }
        self.energy_spec()?.validate()?;
        self.control().validate()
    }

    pub fn energy_spec(&self) -> Result<EnergySpec> {
        use Scenario::*;
        let need = |v: Option<f64>, name: &str| {
            v.ok_or_else(|| Error::InvalidParameter(format!("{} requires `{name}`", self.scenario)))
        };
        let internal = match self.scenario {
            Heat1d | FpLinear | Mks | Heat2d | MksTwoBump => Internal::Entropy,
            Pme1d | FpNonlinear | MksNl | CompactTent => Internal::PowerLaw {
                m: need(self.m, "m")?,
            },
        };
        let mut confinement = match self.scenario {
            FpLinear | FpNonlinear => Confinement::Quadratic { coefficient: 1.0 },
            _ => Confinement::None,
        };
        if let Some(k) = self.confinement {
            confinement = Confinement::Quadratic { coefficient: k };
        }
        let interaction = match self.scenario {
            Mks | MksNl | MksTwoBump => Interaction::LogAttraction {
                chi: need(self.chi, "chi")?,
            },
            CompactTent => Interaction::CompactTent {
                c: need(self.c, "c")?,
            },
            _ => Interaction::None,
        };
        Ok(EnergySpec::new(internal, confinement, interaction).with_p(self.p))
    }

    pub fn profile(&self) -> Result<ProfileSpec> {
        use Scenario::*;
        Ok(match self.scenario {
            Heat1d | FpLinear | Mks | MksNl => ProfileSpec::GaussianHeat { t0: T0 },
            Pme1d | FpNonlinear => ProfileSpec::Barenblatt {
                m: self.m.ok_or_else(|| {
                    Error::InvalidParameter(format!("{} requires `m`", self.scenario))
                })?,
                t0: T0,
            },
            CompactTent => ProfileSpec::Uniform { a: -2.0, b: 2.0 },
            Heat2d => ProfileSpec::Gaussian2D { t0: T0_2D },
            MksTwoBump => ProfileSpec::TwoBump { t0: T0 },
        })
    }

    fn default_spacing(&self) -> Result<(f64, f64, Option<f64>)> {
        use Scenario::*;
        Ok(match self.scenario {
            Pme1d | FpNonlinear => {
                let k0 = barenblatt_support(self.m.unwrap_or(f64::NAN), T0)?;
                (-k0, k0, None)
            }
            CompactTent => (-2.0, 2.0, Some(0.001)),
            MksTwoBump => (-4.5, 4.5, None),
            _ => (-2.5, 2.5, None),
        })
    }

    pub fn initial_system(&self) -> Result<ParticleSystem> {
        let profile = self.profile()?;
        if let ProfileSpec::Gaussian2D { t0 } = profile {
            let side = grid_side(self.n).ok_or_else(|| {
                Error::InvalidParameter(format!("N = {} is not a perfect square", self.n))
            })?;
            return init_grid_2d(t0, side, GRID_HALF_WIDTH);
        }
        let (lo, hi, default_end) = self.default_spacing()?;
        match self.init {
            Some(InitChoice::EqualWeights) => init_equal_weights(&profile, self.n),
            Some(InitChoice::EqualSpacing {
                interval,
                end_weight,
            }) => init_equal_spacing(&profile, self.n, interval.unwrap_or((lo, hi)), end_weight),
            None => init_equal_spacing(&profile, self.n, (lo, hi), default_end),
        }
    }

    /// Closed-form solution (or steady state) the run is compared with.
    pub fn reference(&self) -> Result<Option<ReferenceSolution>> {
        Ok(match self.scenario {
            Scenario::Heat1d => Some(ReferenceSolution::heat(T0)?),
            Scenario::Pme1d if self.confinement.is_none() => Some(ReferenceSolution::barenblatt(
                self.m.unwrap_or(f64::NAN),
                T0,
            )?),
            Scenario::FpLinear if self.confinement.is_none() => {
                Some(ReferenceSolution::fp_linear_steady())
            }
            Scenario::FpNonlinear if self.confinement.is_none() => Some(
                ReferenceSolution::fp_nonlinear_steady(self.m.unwrap_or(f64::NAN))?,
            ),
            _ => None,
        })
    }

    pub fn dt(&self) -> Option<f64> {
        match self.stepping {
            Stepping::Fixed(dt) => Some(dt),
            Stepping::Auto { c } => Some(cfl_suggestion(self.n, c)),
            Stepping::Adaptive => None,
        }
    }

    pub fn control(&self) -> StepControl {
        let control = match self.dt() {
            Some(dt) => StepControl::fixed(dt, self.final_time),
            None => StepControl::adaptive(self.final_time),
        };
        let control = control.with_snapshots(self.snapshots.clone());
        if self.allow_large_dt {
            control.without_cfl_check()
        } else {
            control
        }
    }
}

fn grid_side(n: usize) -> Option<usize> {
    let side = (n as f64).sqrt().round() as usize;
    (side >= 2 && side * side == n).then_some(side)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioRun {
    pub config: ScenarioConfig,
    pub result: SimResult,
    /// Weighted RMS speed of the last recorded state.
    pub final_velocity_norm: f64,
}

/// Build, integrate and, where a reference exists, attach errors.
pub fn run_scenario(config: &ScenarioConfig) -> Result<ScenarioRun> {
    config.validate()?;
    let spec = config.energy_spec()?;
    let sys0 = config.initial_system()?;
    let mut result = run(&sys0, &spec, &config.control())?;
    if let Some(reference) = config.reference()? {
        result.attach_errors(&reference)?;
    }
    let last = result.final_system();
    let final_velocity_norm = match weighted_gradient(last, &spec) {
        Ok(g) => velocity_norm(last, &g),
        Err(_) => f64::INFINITY,
    };
    Ok(ScenarioRun {
        config: config.clone(),
        result,
        final_velocity_norm,
    })
}

/// Error table and fitted slope of a study.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyResult {
    /// `(N or T, error)` pairs.
    pub points: Vec<(f64, f64)>,
    pub slope: f64,
}

/// Independent runs on scoped threads, results in input order.
fn par_map<T, R, F>(items: &[T], f: F) -> Result<Vec<R>>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> Result<R> + Sync,
{
    std::thread::scope(|s| {
        let handles: Vec<_> = items.iter().map(|item| s.spawn(|| f(item))).collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("study worker panicked"))
            .collect()
    })
}

fn require_full_run(result: &SimResult, what: &str) -> Result<()> {
    match result.stop_reason {
        StopReason::ReachedFinalTime => Ok(()),
        reason => Err(Error::InsufficientData(format!(
            "{what} stopped early: {} at t = {}",
            reason.name(),
            reason.time().unwrap_or(f64::NAN)
        ))),
    }
}

/// Wasserstein error at time `t` against the exact solution for each `N`,
/// and the slope of `log e` against `log N`.
///
/// The heat study starts from `[-4, 4]` unless `base` names an interval.
pub fn study_convergence(base: &ScenarioConfig, ns: &[usize], t: f64) -> Result<StudyResult> {
    if !matches!(base.scenario, Scenario::Heat1d | Scenario::Pme1d) {
        return Err(Error::InvalidParameter(format!(
            "convergence study needs heat1d or pme1d, not {}",
            base.scenario
        )));
    }
    if ns.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "a slope needs at least 2 particle counts, got {}",
            ns.len()
        )));
    }
    let mut base = base.clone();
    base.final_time = t;
    base.snapshots = SnapshotPolicy::Ends;
    if base.scenario == Scenario::Heat1d && base.init.is_none() {
        base.init = Some(InitChoice::EqualSpacing {
            interval: Some((-4.0, 4.0)),
            end_weight: None,
        });
    }
    let reference = base.reference()?.ok_or_else(|| {
        Error::InvalidParameter("convergence study needs an exact solution".into())
    })?;

    let errors = par_map(ns, |&n| {
        let config = base.clone().with_n(n);
        config.validate()?;
        let result = run(
            &config.initial_system()?,
            &config.energy_spec()?,
            &config.control(),
        )?;
        require_full_run(&result, &format!("run with N = {n}"))?;
        crate::metrics::wasserstein_error(result.final_system(), &reference, result.final_time())
    })?;

    let points: Vec<(f64, f64)> = ns.iter().map(|&n| n as f64).zip(errors).collect();
    let log_n: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let log_e: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    Ok(StudyResult {
        slope: fit_slope(&log_n, &log_e)?,
        points,
    })
}

/// Discrete error at each `T` against the state reached at `T = 6`, and the
/// slope of `ln e*` against `T`.
///
/// The linear study starts from `[-4, 4]` unless `base` names an interval.
pub fn study_stabilization(base: &ScenarioConfig, ts: &[f64]) -> Result<StudyResult> {
    if !matches!(base.scenario, Scenario::FpLinear | Scenario::FpNonlinear) {
        return Err(Error::InvalidParameter(format!(
            "stabilisation study needs fp-linear or fp-nonlinear, not {}",
            base.scenario
        )));
    }
    if ts.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "a slope needs at least 2 final times, got {}",
            ts.len()
        )));
    }
    if let Some(bad) = ts
        .iter()
        .find(|&&t| !(t > 0.0 && t < STEADY_REFERENCE_TIME))
    {
        return Err(Error::InvalidParameter(format!(
            "stabilisation times must lie in (0, {STEADY_REFERENCE_TIME}), got {bad}"
        )));
    }
    let mut config = base.clone();
    config.final_time = STEADY_REFERENCE_TIME;
    config.snapshots = SnapshotPolicy::AtTimes(ts.to_vec());
    if config.scenario == Scenario::FpLinear && config.init.is_none() {
        config.init = Some(InitChoice::EqualSpacing {
            interval: Some((-4.0, 4.0)),
            end_weight: None,
        });
    }
    config.validate()?;
    // One run passes through every requested time on its way to T = 6.
    let result = run(
        &config.initial_system()?,
        &config.energy_spec()?,
        &config.control(),
    )?;
    require_full_run(&result, "stabilisation run")?;
    let steady = result.final_system();

    let points = ts
        .iter()
        .map(|&t| {
            let snap = result
                .snapshot_at(t)
                .ok_or_else(|| Error::InsufficientData(format!("no snapshot at T = {t}")))?;
            Ok((t, discrete_error(&snap.system, steady)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    Ok(StudyResult {
        slope: fit_slope(&xs, &ys)?,
        points,
    })
}

/// Second-moment history of a Keller–Segel run against the exact slope
/// `2(1 - χ(1 - 1/N))` of the equal-weight particle system.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentStudy {
    pub times: Vec<f64>,
    pub second_moment: Vec<f64>,
    pub measured_slope: f64,
    pub predicted_slope: f64,
    pub stop_reason: StopReason,
}

/// Fits `M_2(t)` on `[0, window]`. Unless `base` chooses otherwise the
/// particles start with equal weights, the setting in which the slope is exact.
pub fn study_moment(base: &ScenarioConfig, window: f64) -> Result<MomentStudy> {
    if base.scenario != Scenario::Mks {
        return Err(Error::InvalidParameter(format!(
            "moment study needs mks, not {}",
            base.scenario
        )));
    }
    let mut config = base.clone();
    config.final_time = window;
    config.snapshots = SnapshotPolicy::EveryTime(window / 100.0);
    if config.init.is_none() {
        config.init = Some(InitChoice::EqualWeights);
    }
    config.validate()?;
    let chi = config.chi.expect("validated");
    let result = run(
        &config.initial_system()?,
        &config.energy_spec()?,
        &config.control(),
    )?;
    let times = result.metrics.times.clone();
    let second_moment = result.metrics.second_moment.clone();
    Ok(MomentStudy {
        measured_slope: fit_slope(&times, &second_moment)?,
        predicted_slope: predicted_moment_slope(config.n, chi),
        times,
        second_moment,
        stop_reason: result.stop_reason,
    })
}
