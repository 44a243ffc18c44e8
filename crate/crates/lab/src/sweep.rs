//! Parameter sweeps over a base configuration.
//!
//! Every grid point is an isolated run with its own output subdirectory.
//! Results come back in grid order whatever the execution order.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use dyadic_core::budget::leray_hopf_check;
use dyadic_core::regime::Regime;
use dyadic_core::{classify_regime, integrate, EventKind, RunStatus};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{Format, RunConfig};
use crate::data::DataSpec;
use crate::error::LabError;
use crate::experiments::{Criterion, ExperimentReport};
use crate::timeseries::write_timeseries;

pub const AXES: [&str; 9] = ["theta", "delta", "nu", "mu", "d_i", "amplitude", "k", "seed", "lambda"];

/// Environment variable capping sweep concurrency.
pub const THREADS_ENV: &str = "DYADIC_THREADS";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepGrid {
    pub axes: BTreeMap<String, Vec<f64>>,
    /// Maximum number of concurrent runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cap: Option<usize>,
}

impl SweepGrid {
    pub fn validate(&self) -> Result<(), LabError> {
        if self.axes.is_empty() {
            return Err(LabError::Config("sweep: at least one axis is required".into()));
        }
        for (name, values) in &self.axes {
            if !AXES.contains(&name.as_str()) {
                return Err(LabError::Config(format!(
                    "sweep.axes: unknown axis `{name}` (expected one of {})",
                    AXES.join(", ")
                )));
            }
            if values.is_empty() {
                return Err(LabError::Config(format!("sweep.axes.{name}: empty value list")));
            }
            if values.iter().any(|v| !v.is_finite()) {
                return Err(LabError::Config(format!("sweep.axes.{name}: values must be finite")));
            }
        }
        if self.axes.contains_key("theta") && self.axes.contains_key("delta") {
            return Err(LabError::Config("sweep.axes: give exactly one of theta and delta".into()));
        }
        if self.cap == Some(0) {
            return Err(LabError::Config("sweep.cap: must be at least 1".into()));
        }
        self.size()?;
        Ok(())
    }

    /// Number of grid points; an error if it overflows.
    pub fn size(&self) -> Result<usize, LabError> {
        self.axes
            .values()
            .try_fold(1usize, |n, v| n.checked_mul(v.len()))
            .ok_or_else(|| LabError::Config("sweep: grid size overflows".into()))
    }

    /// Cartesian product in row-major order over the sorted axis names.
    pub fn points(&self) -> Vec<BTreeMap<String, f64>> {
        let mut out = vec![BTreeMap::new()];
        for (name, values) in &self.axes {
            out = out
                .into_iter()
                .flat_map(|p| {
                    values.iter().map(move |&v| {
                        let mut q = p.clone();
                        q.insert(name.clone(), v);
                        q
                    })
                })
                .collect();
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub index: usize,
    pub values: BTreeMap<String, f64>,
    pub status: Option<RunStatus>,
    pub end_time: Option<f64>,
    /// Time of the first blow-up, overflow or collapse event.
    pub divergence_time: Option<f64>,
    pub regime: Option<Regime>,
    pub report: Option<ExperimentReport>,
    pub directory: Option<PathBuf>,
    pub error: Option<String>,
}

fn as_count(name: &str, v: f64) -> Result<u64, LabError> {
    if v >= 0.0 && v.fract() == 0.0 && v <= u64::MAX as f64 {
        Ok(v as u64)
    } else {
        Err(LabError::Config(format!("sweep axis {name}: {v} is not a non-negative integer")))
    }
}

/// The base configuration with one grid point applied.
pub fn apply_point(base: &RunConfig, values: &BTreeMap<String, f64>) -> Result<RunConfig, LabError> {
    let mut cfg = base.clone();
    cfg.sweep = None;
    for (name, &v) in values {
        match name.as_str() {
            "theta" => {
                cfg.model.theta = Some(v);
                cfg.model.delta = None;
            }
            "delta" => {
                cfg.model.delta = Some(v);
                cfg.model.theta = None;
            }
            "nu" => cfg.model.nu = v,
            "mu" => cfg.model.mu = v,
            "d_i" => cfg.model.d_i = v,
            "lambda" => cfg.model.lambda = v,
            "k" => cfg.model.k = as_count(name, v)? as usize,
            "amplitude" => match &mut cfg.data {
                DataSpec::SingleShell { amplitude, .. } | DataSpec::Geometric { amplitude, .. } => *amplitude = v,
                DataSpec::RandomPositive { e_gamma, .. } => *e_gamma = v,
                _ => {
                    return Err(LabError::Config(
                        "sweep axis amplitude needs a single_shell, geometric or random_positive generator".into(),
                    ))
                }
            },
            "seed" => match &mut cfg.data {
                DataSpec::RandomPositive { seed, .. } => *seed = as_count(name, v)?,
                _ => return Err(LabError::Config("sweep axis seed needs the random_positive generator".into())),
            },
            other => return Err(LabError::Config(format!("sweep: unknown axis `{other}`"))),
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run_point(
    base: &RunConfig,
    index: usize,
    values: BTreeMap<String, f64>,
    out: Option<&Path>,
) -> SweepPoint {
    let mut point = SweepPoint {
        index,
        values,
        status: None,
        end_time: None,
        divergence_time: None,
        regime: None,
        report: None,
        directory: None,
        error: None,
    };
    if let Err(e) = fill_point(base, out, &mut point) {
        point.error = Some(e.to_string());
    }
    point
}

fn fill_point(base: &RunConfig, out: Option<&Path>, point: &mut SweepPoint) -> Result<(), LabError> {
    let cfg = apply_point(base, &point.values)?;
    let params = cfg.params()?;
    point.regime = Some(classify_regime(&params).regime);
    let state0 = cfg.initial_state()?;
    let traj = integrate(&state0, &params, &cfg.integrator, &cfg.selector())?;
    point.status = Some(traj.status);
    point.end_time = Some(traj.end());
    point.divergence_time = traj
        .events
        .iter()
        .find(|e| {
            matches!(
                e.kind,
                EventKind::BlowupSuspected | EventKind::Overflow | EventKind::StepCollapse
            )
        })
        .map(|e| e.t);

    let mut report = ExperimentReport {
        name: format!("sweep_point_{}", point.index),
        params: serde_json::json!({ "model": params, "integrator": cfg.integrator }),
        criteria: Vec::new(),
        artifacts: Vec::new(),
    };
    let lh = leray_hopf_check(&traj, &params, traj.start(), traj.end())?;
    report.criteria.push(Criterion {
        name: "leray_hopf_slack".into(),
        anchor: "Leray-Hopf energy inequality between any two times",
        pass: Some(lh.pass),
        measured: lh.slack,
        threshold: -lh.tolerance,
        note: format!("status {:?}", traj.status),
    });

    if let Some(root) = out {
        let dir = root.join(format!("point_{:04}", point.index));
        fs::create_dir_all(&dir).map_err(|e| LabError::io(&dir, e))?;
        if cfg.output.wants(Format::Csv) {
            let csv = dir.join("timeseries.csv");
            let events = write_timeseries(&traj, &params, cfg.blowup.gamma, &csv)?;
            report.artifacts.push(csv);
            report.artifacts.push(events);
        }
        if cfg.output.wants(Format::Json) {
            let path = dir.join("report.json");
            report.artifacts.push(path.clone());
            fs::write(&path, report.to_json() + "\n").map_err(|e| LabError::io(&path, e))?;
        }
        point.directory = Some(dir);
    }
    point.report = Some(report);
    Ok(())
}

/// Thread count: the grid cap, further limited by `DYADIC_THREADS`.
pub fn concurrency(grid: &SweepGrid) -> usize {
    let env = std::env::var(THREADS_ENV).ok().and_then(|s| s.trim().parse::<usize>().ok());
    let mut n = grid.cap.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if let Some(e) = env.filter(|&e| e > 0) {
        n = n.min(e);
    }
    n.max(1)
}

/// Runs every grid point of `base.sweep`. Per-point failures land in
/// [`SweepPoint::error`]; only an invalid grid aborts.
pub fn sweep_run(base: &RunConfig, out: Option<&Path>) -> Result<Vec<SweepPoint>, LabError> {
    let grid = base
        .sweep
        .as_ref()
        .ok_or_else(|| LabError::Config("sweep: configuration has no sweep section".into()))?;
    grid.validate()?;
    let points = grid.points();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(concurrency(grid))
        .build()
        .map_err(|e| LabError::Precondition(format!("thread pool: {e}")))?;
    let results = pool.install(|| {
        points
            .into_par_iter()
            .enumerate()
            .map(|(i, values)| run_point(base, i, values, out))
            .collect::<Vec<_>>()
    });
    if let Some(root) = out {
        let path = root.join("sweep.json");
        let text = serde_json::to_string_pretty(&results).expect("sweep serializes");
        fs::write(&path, text + "\n").map_err(|e| LabError::io(&path, e))?;
    }
    Ok(results)
}
