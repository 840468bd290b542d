//! Command-line front end for `blobflow`: presets, config files, studies and
//! CSV output.

pub mod config;
pub mod error;
pub mod output;

use blobflow::integrate::StopReason;
use blobflow::scenario::{run_scenario, study_convergence, study_moment, study_stabilization};
use clap::Parser;
use config::{Plan, Settings, Task, KEYS};
pub use error::CliError;
use output::real;
use std::path::PathBuf;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_BLOW_UP: i32 = 2;

/// Run a particle scenario or a study and write CSV results.
///
/// Settings come from an optional `key = value` file; flags override it.
#[derive(Debug, Parser)]
#[command(name = "blobflow", version)]
pub struct Args {
    /// Config file with one `key = value` per line.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// heat1d, pme1d, fp-linear, fp-nonlinear, mks, mks-nl, compact-tent, heat2d, mks-twobump
    #[arg(long)]
    pub scenario: Option<String>,
    /// Number of particles (a perfect square for heat2d).
    #[arg(long = "N")]
    pub n: Option<String>,
    /// Time step: a number, `auto` (C/N²) or `adaptive`.
    #[arg(long)]
    pub dt: Option<String>,
    /// Constant C of `dt = auto`.
    #[arg(long)]
    pub cfl: Option<String>,
    /// Final time.
    #[arg(long = "T")]
    pub t: Option<String>,
    /// Softmin exponent.
    #[arg(long)]
    pub p: Option<String>,
    /// Chemotactic sensitivity of the log attraction.
    #[arg(long)]
    pub chi: Option<String>,
    /// Porous-medium exponent.
    #[arg(long)]
    pub m: Option<String>,
    /// Height of the compact tent potential.
    #[arg(long)]
    pub c: Option<String>,
    /// Coefficient k of an added confinement k|x|²/2.
    #[arg(long)]
    pub confinement: Option<String>,
    /// equal-weights or equal-spacing.
    #[arg(long)]
    pub init: Option<String>,
    /// Initial interval `lo,hi` for equal spacing.
    #[arg(long, allow_hyphen_values = true)]
    pub interval: Option<String>,
    /// Weight of the two end particles.
    #[arg(long = "end-weight")]
    pub end_weight: Option<String>,
    /// Snapshot period in model time.
    #[arg(long = "snapshot-every")]
    pub snapshot_every: Option<String>,
    /// Snapshot period in steps.
    #[arg(long = "snapshot-steps")]
    pub snapshot_steps: Option<String>,
    /// Allow fixed steps above 1/N².
    #[arg(long = "no-cfl-check")]
    pub no_cfl_check: bool,
    /// Output directory.
    #[arg(long)]
    pub out: Option<String>,
    /// convergence, stabilization or moment.
    #[arg(long)]
    pub study: Option<String>,
    /// Particle counts of a convergence study, comma separated.
    #[arg(long = "Ns")]
    pub ns: Option<String>,
    /// Final times of a stabilization study, comma separated.
    #[arg(long = "Ts")]
    pub ts: Option<String>,
    /// Time window of a moment study.
    #[arg(long)]
    pub window: Option<String>,
}

impl Args {
    pub fn overrides(&self) -> Result<Settings, CliError> {
        let mut s = Settings::default();
        let pairs = [
            ("scenario", &self.scenario),
            ("N", &self.n),
            ("dt", &self.dt),
            ("cfl", &self.cfl),
            ("T", &self.t),
            ("p", &self.p),
            ("chi", &self.chi),
            ("m", &self.m),
            ("c", &self.c),
            ("confinement", &self.confinement),
            ("init", &self.init),
            ("interval", &self.interval),
            ("end_weight", &self.end_weight),
            ("snapshot_every", &self.snapshot_every),
            ("snapshot_steps", &self.snapshot_steps),
            ("out", &self.out),
            ("study", &self.study),
            ("Ns", &self.ns),
            ("Ts", &self.ts),
            ("window", &self.window),
        ];
        debug_assert!(pairs.iter().all(|(k, _)| KEYS.contains(k)));
        for (key, value) in pairs {
            if let Some(v) = value {
                s.set(key, v)?;
            }
        }
        if self.no_cfl_check {
            s.cfl_check = Some(false);
        }
        Ok(s)
    }

    pub fn plan(&self) -> Result<Plan, CliError> {
        let file = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
                    path: path.clone(),
                    source,
                })?;
                Settings::parse(&text)?
            }
            None => Settings::default(),
        };
        file.merge(self.overrides()?).resolve()
    }
}

/// What a finished invocation reports.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub summary: Vec<(&'static str, String)>,
    pub exit_code: i32,
}

/// Execute a plan, writing its files into `plan.out`.
pub fn execute(plan: &Plan) -> Result<Outcome, CliError> {
    output::ensure_dir(&plan.out)?;
    let cfg = &plan.config;
    let mut summary: Vec<(&'static str, String)> = vec![("task", plan.task.name().into())];
    let mut exit_code = EXIT_OK;
    match &plan.task {
        Task::Run => {
            let run = run_scenario(cfg)?;
            let res = &run.result;
            output::write_snapshots(&plan.out, res, cfg.p)?;
            output::write_metrics(&plan.out, res)?;
            summary.push(("stop_reason", res.stop_reason.name().into()));
            if let Some(t) = res.stop_reason.time() {
                summary.push(("stop_time", real(t)));
            }
            summary.push(("final_time", real(res.final_time())));
            summary.push(("steps", res.steps.to_string()));
            summary.push(("last_dt", real(res.last_dt)));
            summary.push(("final_velocity_norm", real(run.final_velocity_norm)));
            if let Some(e) = res.metrics.errors.as_ref().and_then(|e| e.last()) {
                summary.push(("final_error", real(*e)));
            }
            exit_code = match res.stop_reason {
                StopReason::ReachedFinalTime => EXIT_OK,
                StopReason::BlowUp { .. } => EXIT_BLOW_UP,
                StopReason::OrderingViolated { .. } => EXIT_FAILURE,
            };
        }
        Task::Convergence { ns } => {
            let study = study_convergence(cfg, ns, cfg.final_time)?;
            output::write_errors(&plan.out, &study.points)?;
            summary.push(("slope", real(study.slope)));
        }
        Task::Stabilization { ts } => {
            let study = study_stabilization(cfg, ts)?;
            output::write_errors(&plan.out, &study.points)?;
            summary.push(("slope", real(study.slope)));
        }
        Task::Moment { window } => {
            let study = study_moment(cfg, *window)?;
            output::write_moment(&plan.out, &study.times, &study.second_moment)?;
            summary.push(("measured_slope", real(study.measured_slope)));
            summary.push(("predicted_slope", real(study.predicted_slope)));
            summary.push(("stop_reason", study.stop_reason.name().into()));
        }
    }
    output::write_manifest(&plan.out, plan, &summary)?;
    Ok(Outcome { summary, exit_code })
}

/// Parse, execute and report; returns the process exit code.
pub fn main_with(args: &Args) -> i32 {
    let result = args.plan().and_then(|plan| execute(&plan));
    match result {
        Ok(outcome) => {
            for (k, v) in &outcome.summary {
                println!("{k} = {v}");
            }
            outcome.exit_code
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_FAILURE
        }
    }
}
