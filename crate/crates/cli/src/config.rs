//! Flat `key = value` configuration, merged with command-line overrides.

use crate::error::CliError;
use blobflow::integrate::SnapshotPolicy;
use blobflow::scenario::{InitChoice, Scenario, ScenarioConfig, Stepping, DEFAULT_CFL};
use std::path::PathBuf;

/// Every recognised key, as it appears in a config file.
pub const KEYS: &[&str] = &[
    "scenario",
    "N",
    "p",
    "dt",
    "cfl",
    "T",
    "chi",
    "m",
    "c",
    "confinement",
    "init",
    "interval",
    "end_weight",
    "snapshot_every",
    "snapshot_steps",
    "cfl_check",
    "out",
    "study",
    "Ns",
    "Ts",
    "window",
];

/// Raw, unvalidated settings; `None` means "not given here".
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    pub scenario: Option<String>,
    pub n: Option<usize>,
    pub p: Option<f64>,
    pub dt: Option<String>,
    pub cfl: Option<f64>,
    pub t: Option<f64>,
    pub chi: Option<f64>,
    pub m: Option<f64>,
    pub c: Option<f64>,
    pub confinement: Option<f64>,
    pub init: Option<String>,
    pub interval: Option<(f64, f64)>,
    pub end_weight: Option<f64>,
    pub snapshot_every: Option<f64>,
    pub snapshot_steps: Option<usize>,
    pub cfl_check: Option<bool>,
    pub out: Option<PathBuf>,
    pub study: Option<String>,
    pub ns: Option<Vec<usize>>,
    pub ts: Option<Vec<f64>>,
    pub window: Option<f64>,
}

fn field_err(field: &str, message: impl Into<String>) -> CliError {
    CliError::Field {
        field: field.to_string(),
        message: message.into(),
    }
}

fn parse_f64(field: &str, v: &str) -> Result<f64, CliError> {
    v.trim()
        .parse::<f64>()
        .map_err(|_| field_err(field, format!("expected a number, got `{v}`")))
}

fn parse_usize(field: &str, v: &str) -> Result<usize, CliError> {
    v.trim()
        .parse::<usize>()
        .map_err(|_| field_err(field, format!("expected a non-negative integer, got `{v}`")))
}

pub fn parse_list<T, F>(field: &str, v: &str, item: F) -> Result<Vec<T>, CliError>
where
    F: Fn(&str, &str) -> Result<T, CliError>,
{
    v.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| item(field, s))
        .collect()
}

pub fn parse_interval(field: &str, v: &str) -> Result<(f64, f64), CliError> {
    match parse_list(field, v, parse_f64)?.as_slice() {
        [a, b] => Ok((*a, *b)),
        _ => Err(field_err(field, format!("expected `lo,hi`, got `{v}`"))),
    }
}

fn parse_bool(field: &str, v: &str) -> Result<bool, CliError> {
    match v.trim() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(field_err(
            field,
            format!("expected true or false, got `{v}`"),
        )),
    }
}

impl Settings {
    /// Set one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let v = value.trim();
        match key {
            "scenario" => self.scenario = Some(v.to_string()),
            "N" => self.n = Some(parse_usize(key, v)?),
            "p" => self.p = Some(parse_f64(key, v)?),
            "dt" => self.dt = Some(v.to_string()),
            "cfl" => self.cfl = Some(parse_f64(key, v)?),
            "T" => self.t = Some(parse_f64(key, v)?),
            "chi" => self.chi = Some(parse_f64(key, v)?),
            "m" => self.m = Some(parse_f64(key, v)?),
            "c" => self.c = Some(parse_f64(key, v)?),
            "confinement" => self.confinement = Some(parse_f64(key, v)?),
            "init" => self.init = Some(v.to_string()),
            "interval" => self.interval = Some(parse_interval(key, v)?),
            "end_weight" => self.end_weight = Some(parse_f64(key, v)?),
            "snapshot_every" => self.snapshot_every = Some(parse_f64(key, v)?),
            "snapshot_steps" => self.snapshot_steps = Some(parse_usize(key, v)?),
            "cfl_check" => self.cfl_check = Some(parse_bool(key, v)?),
            "out" => self.out = Some(PathBuf::from(v)),
            "study" => self.study = Some(v.to_string()),
            "Ns" => self.ns = Some(parse_list(key, v, parse_usize)?),
            "Ts" => self.ts = Some(parse_list(key, v, parse_f64)?),
            "window" => self.window = Some(parse_f64(key, v)?),
            _ => return Err(field_err(key, "unknown key")),
        }
        Ok(())
    }

    /// Parse a config file body. Blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut s = Settings::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let wrap = |e: CliError| CliError::Line {
                line: idx + 1,
                message: e.to_string(),
            };
            let (key, value) = line.split_once('=').ok_or_else(|| {
                wrap(CliError::Field {
                    field: line.to_string(),
                    message: "expected `key = value`".into(),
                })
            })?;
            s.set(key.trim(), value).map_err(wrap)?;
        }
        Ok(s)
    }

    /// Values present in `over` win.
    pub fn merge(self, over: Settings) -> Settings {
        Settings {
            scenario: over.scenario.or(self.scenario),
            n: over.n.or(self.n),
            p: over.p.or(self.p),
            dt: over.dt.or(self.dt),
            cfl: over.cfl.or(self.cfl),
            t: over.t.or(self.t),
            chi: over.chi.or(self.chi),
            m: over.m.or(self.m),
            c: over.c.or(self.c),
            confinement: over.confinement.or(self.confinement),
            init: over.init.or(self.init),
            interval: over.interval.or(self.interval),
            end_weight: over.end_weight.or(self.end_weight),
            snapshot_every: over.snapshot_every.or(self.snapshot_every),
            snapshot_steps: over.snapshot_steps.or(self.snapshot_steps),
            cfl_check: over.cfl_check.or(self.cfl_check),
            out: over.out.or(self.out),
            study: over.study.or(self.study),
            ns: over.ns.or(self.ns),
            ts: over.ts.or(self.ts),
            window: over.window.or(self.window),
        }
    }

    /// Resolve into a validated scenario configuration and a task.
    pub fn resolve(&self) -> Result<Plan, CliError> {
        let name = self
            .scenario
            .as_deref()
            .ok_or_else(|| field_err("scenario", "missing"))?;
        let scenario: Scenario = name
            .parse()
            .map_err(|e| field_err("scenario", format!("{e}")))?;
        let mut cfg = ScenarioConfig::new(scenario);
        if let Some(n) = self.n {
            cfg.n = n;
        }
        if let Some(p) = self.p {
            cfg.p = p;
        }
        if let Some(t) = self.t {
            cfg.final_time = t;
        }
        let cfl = self.cfl.unwrap_or(DEFAULT_CFL);
        cfg.stepping = match self.dt.as_deref() {
            None if self.cfl.is_some() => Stepping::Auto { c: cfl },
            None => cfg.stepping,
            Some("auto") => Stepping::Auto { c: cfl },
            Some("adaptive") => Stepping::Adaptive,
            Some(v) => Stepping::Fixed(parse_f64("dt", v)?),
        };
        cfg.chi = self.chi;
        cfg.m = self.m;
        cfg.c = self.c;
        cfg.confinement = self.confinement;
        cfg.init = match self.init.as_deref() {
            None if self.interval.is_none() && self.end_weight.is_none() => None,
            None | Some("equal-spacing") => Some(InitChoice::EqualSpacing {
                interval: self.interval,
                end_weight: self.end_weight,
            }),
            Some("equal-weights") => {
                if self.interval.is_some() || self.end_weight.is_some() {
                    return Err(field_err(
                        "init",
                        "equal-weights takes no interval or end_weight",
                    ));
                }
                Some(InitChoice::EqualWeights)
            }
            Some(other) => {
                return Err(field_err(
                    "init",
                    format!("expected equal-weights or equal-spacing, got `{other}`"),
                ))
            }
        };
        cfg.snapshots = match (self.snapshot_every, self.snapshot_steps) {
            (Some(_), Some(_)) => {
                return Err(field_err(
                    "snapshot_every",
                    "give either snapshot_every or snapshot_steps",
                ))
            }
            (Some(tau), None) => SnapshotPolicy::EveryTime(tau),
            (None, Some(k)) => SnapshotPolicy::EverySteps(k),
            (None, None) => cfg.snapshots,
        };
        cfg.allow_large_dt = !self.cfl_check.unwrap_or(true);

        let task = match self.study.as_deref() {
            None => Task::Run,
            Some("convergence") => Task::Convergence {
                ns: self
                    .ns
                    .clone()
                    .ok_or_else(|| field_err("Ns", "convergence study needs Ns"))?,
            },
            Some("stabilization") => Task::Stabilization {
                ts: self
                    .ts
                    .clone()
                    .ok_or_else(|| field_err("Ts", "stabilization study needs Ts"))?,
            },
            Some("moment") => Task::Moment {
                window: self.window.unwrap_or(cfg.final_time),
            },
            Some(other) => {
                return Err(field_err(
                    "study",
                    format!("expected convergence, stabilization or moment, got `{other}`"),
                ))
            }
        };
        if matches!(task, Task::Run) {
            cfg.validate()?;
        }
        Ok(Plan {
            config: cfg,
            task,
            out: self.out.clone().unwrap_or_else(|| PathBuf::from("out")),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Task {
    Run,
    Convergence { ns: Vec<usize> },
    Stabilization { ts: Vec<f64> },
    Moment { window: f64 },
}

impl Task {
    pub fn name(&self) -> &'static str {
        match self {
            Task::Run => "run",
            Task::Convergence { .. } => "convergence",
            Task::Stabilization { .. } => "stabilization",
            Task::Moment { .. } => "moment",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Plan {
    pub config: ScenarioConfig,
    pub task: Task,
    pub out: PathBuf,
}
