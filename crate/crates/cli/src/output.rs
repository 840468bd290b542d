//! CSV tables and the run manifest. Every file is written to a temporary
//! sibling first and renamed into place.

use crate::config::Plan;
use crate::error::CliError;
use blobflow::energy::ball_volumes;
use blobflow::integrate::SimResult;
use blobflow::integrate::SnapshotPolicy;
use blobflow::scenario::{InitChoice, Stepping};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

pub const SNAPSHOTS_FILE: &str = "snapshots.csv";
pub const METRICS_FILE: &str = "metrics.csv";
pub const ERRORS_FILE: &str = "errors.csv";
pub const MOMENT_FILE: &str = "moment.csv";
pub const MANIFEST_FILE: &str = "manifest.txt";

/// Round-trip formatting with 17 significant digits.
pub fn real(x: f64) -> String {
    format!("{x:.16e}")
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn tmp_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".tmp");
    path.with_file_name(name)
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let tmp = tmp_path(path);
    fs::write(&tmp, bytes).map_err(io_err(&tmp))?;
    fs::rename(&tmp, path).map_err(io_err(path))
}

fn csv_bytes(path: &Path, header: &[&str], rows: Vec<Vec<String>>) -> Result<Vec<u8>, CliError> {
    let wrap = |source| CliError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(wrap)?;
    for row in rows {
        w.write_record(&row).map_err(wrap)?;
    }
    w.into_inner().map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        source: e.into_error(),
    })
}

pub fn write_csv(path: &Path, header: &[&str], rows: Vec<Vec<String>>) -> Result<(), CliError> {
    let bytes = csv_bytes(path, header, rows)?;
    write_atomic(path, &bytes)
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(io_err(dir))
}

/// `t,i,x{,y},w,ball`, one row per particle per snapshot.
pub fn write_snapshots(dir: &Path, result: &SimResult, p: f64) -> Result<(), CliError> {
    let dim = result.final_system().dim();
    let mut header = vec!["t", "i", "x"];
    if dim == 2 {
        header.push("y");
    }
    header.extend(["w", "ball"]);
    let mut rows = Vec::new();
    for snap in &result.snapshots {
        let balls = ball_volumes(&snap.system, p)?;
        for (i, (x, w)) in snap.system.points().zip(snap.system.weights()).enumerate() {
            let mut row = vec![real(snap.t), i.to_string()];
            row.extend(x.iter().map(|&v| real(v)));
            row.push(real(*w));
            row.push(real(balls[i]));
            rows.push(row);
        }
    }
    write_csv(&dir.join(SNAPSHOTS_FILE), &header, rows)
}

pub fn write_metrics(dir: &Path, result: &SimResult) -> Result<(), CliError> {
    let m = &result.metrics;
    let rows = (0..m.len())
        .map(|k| {
            let e = &m.energy[k];
            vec![
                real(m.times[k]),
                real(e.total),
                real(e.internal),
                real(e.confinement),
                real(e.interaction),
                real(m.second_moment[k]),
                real(m.entropy[k]),
            ]
        })
        .collect();
    write_csv(
        &dir.join(METRICS_FILE),
        &[
            "t",
            "energy_total",
            "energy_internal",
            "energy_confine",
            "energy_interact",
            "m2",
            "entropy",
        ],
        rows,
    )
}

pub fn write_errors(dir: &Path, points: &[(f64, f64)]) -> Result<(), CliError> {
    let rows = points
        .iter()
        .map(|&(x, e)| vec![real(x), real(e)])
        .collect();
    write_csv(&dir.join(ERRORS_FILE), &["N_or_T", "error"], rows)
}

pub fn write_moment(dir: &Path, times: &[f64], m2: &[f64]) -> Result<(), CliError> {
    let rows = times
        .iter()
        .zip(m2)
        .map(|(&t, &m)| vec![real(t), real(m)])
        .collect();
    write_csv(&dir.join(MOMENT_FILE), &["t", "m2"], rows)
}

fn opt(v: Option<f64>) -> String {
    v.map(real).unwrap_or_else(|| "none".into())
}

/// Manifest in the config file format: the resolved settings first, so the
/// file can be fed back with `--config`, then `# result` lines as comments.
pub fn manifest(plan: &Plan, results: &[(&str, String)]) -> String {
    let cfg = &plan.config;
    let mut s = String::new();
    let mut line = |k: &str, v: String| {
        let _ = writeln!(s, "{k} = {v}");
    };
    line("scenario", cfg.scenario.to_string());
    line("N", cfg.n.to_string());
    line("p", real(cfg.p));
    match cfg.stepping {
        Stepping::Fixed(dt) => line("dt", real(dt)),
        Stepping::Auto { c } => {
            line("dt", "auto".into());
            line("cfl", real(c));
        }
        Stepping::Adaptive => line("dt", "adaptive".into()),
    }
    line("T", real(cfg.final_time));
    for (k, v) in [
        ("chi", cfg.chi),
        ("m", cfg.m),
        ("c", cfg.c),
        ("confinement", cfg.confinement),
    ] {
        if v.is_some() {
            line(k, opt(v));
        }
    }
    match cfg.init {
        None => {}
        Some(InitChoice::EqualWeights) => line("init", "equal-weights".into()),
        Some(InitChoice::EqualSpacing {
            interval,
            end_weight,
        }) => {
            line("init", "equal-spacing".into());
            if let Some((a, b)) = interval {
                line("interval", format!("{},{}", real(a), real(b)));
            }
            if let Some(e) = end_weight {
                line("end_weight", real(e));
            }
        }
    }
    match &cfg.snapshots {
        SnapshotPolicy::EveryTime(tau) => line("snapshot_every", real(*tau)),
        SnapshotPolicy::EverySteps(k) => line("snapshot_steps", k.to_string()),
        _ => {}
    }
    line("cfl_check", (!cfg.allow_large_dt).to_string());
    line("out", plan.out.display().to_string());
    match &plan.task {
        crate::config::Task::Run => {}
        crate::config::Task::Convergence { ns } => {
            line("study", "convergence".into());
            line(
                "Ns",
                ns.iter()
                    .map(|n| n.to_string())
                    .collect::<Vec<_>>()
                    .join(","),
            );
        }
        crate::config::Task::Stabilization { ts } => {
            line("study", "stabilization".into());
            line(
                "Ts",
                ts.iter().map(|&t| real(t)).collect::<Vec<_>>().join(","),
            );
        }
        crate::config::Task::Moment { window } => {
            line("study", "moment".into());
            line("window", real(*window));
        }
    }
    let _ = writeln!(s, "# version = {}", blobflow::VERSION);
    for (k, v) in results {
        let _ = writeln!(s, "# {k} = {v}");
    }
    s
}

pub fn write_manifest(dir: &Path, plan: &Plan, results: &[(&str, String)]) -> Result<(), CliError> {
    write_atomic(&dir.join(MANIFEST_FILE), manifest(plan, results).as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reals_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-7, 6.02214076e23] {
            let s = real(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
        assert_eq!(real(0.5), "5.0000000000000000e-1");
    }

    #[test]
    fn tmp_sibling() {
        assert_eq!(tmp_path(Path::new("a/b.csv")), PathBuf::from("a/b.csv.tmp"));
    }
}
