//! CSV time series and the sibling events file.
//!
//! Floats are written with Rust's shortest round-trip formatting, so parsing
//! a file and writing it again reproduces it byte for byte.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use dyadic_core::blowup::{e_gamma, lyapunov_value};
use dyadic_core::{blowup_constants, hs_norm, BlowupConstants, ModelParams, Sample, Trajectory};
use serde::Serialize;

use crate::error::LabError;

pub const HEADER: &str = "t,dt,E_total,E_a,E_b,H1_a,H1_b,E_gamma,L,min_a,min_b,status";

/// One CSV row. `E_*` are squared norms, `H1_*` are norms.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticsRow {
    pub t: f64,
    pub dt: f64,
    pub e_total: f64,
    pub e_a: f64,
    pub e_b: f64,
    pub h1_a: f64,
    pub h1_b: f64,
    pub e_gamma: f64,
    pub l: f64,
    pub min_a: f64,
    pub min_b: f64,
    pub status: String,
}

fn min_or_zero(x: &[f64]) -> f64 {
    x.iter().copied().reduce(f64::min).unwrap_or(0.0)
}

pub fn diagnostics(sample: &Sample, params: &ModelParams, consts: &BlowupConstants) -> DiagnosticsRow {
    let s = &sample.state;
    let lam = params.lambda;
    let e_a = hs_norm(&s.a, 0.0, lam).map_or(f64::NAN, |v| v * v);
    let e_b = hs_norm(&s.b, 0.0, lam).map_or(f64::NAN, |v| v * v);
    DiagnosticsRow {
        t: sample.t,
        dt: sample.dt,
        e_total: s.energy(),
        e_a,
        e_b,
        h1_a: hs_norm(&s.a, 1.0, lam).unwrap_or(f64::NAN),
        h1_b: hs_norm(&s.b, 1.0, lam).unwrap_or(f64::NAN),
        e_gamma: e_gamma(s, consts.gamma, lam),
        l: lyapunov_value(s, consts),
        min_a: min_or_zero(&s.a),
        min_b: min_or_zero(&s.b),
        status: "Running".into(),
    }
}

/// Rows for every sample; the last row carries the final run status.
pub fn rows(traj: &Trajectory, params: &ModelParams, gamma: f64) -> Result<Vec<DiagnosticsRow>, LabError> {
    let consts = blowup_constants(gamma, params.lambda, params.theta, params.nu, params.mu)?;
    let mut out: Vec<_> = traj
        .samples
        .iter()
        .map(|s| diagnostics(s, params, &consts))
        .collect();
    if let Some(last) = out.last_mut() {
        last.status = format!("{:?}", traj.status);
    }
    Ok(out)
}

pub fn render_csv(rows: &[DiagnosticsRow]) -> String {
    let mut s = String::with_capacity(64 * (rows.len() + 1));
    s.push_str(HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(
            s,
            "{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{}",
            r.t, r.dt, r.e_total, r.e_a, r.e_b, r.h1_a, r.h1_b, r.e_gamma, r.l, r.min_a, r.min_b, r.status
        );
    }
    s
}

pub fn parse_csv(text: &str, path: &Path) -> Result<Vec<DiagnosticsRow>, LabError> {
    let fail = |line: usize, msg: String| LabError::Format {
        path: path.to_path_buf(),
        line,
        msg,
    };
    let mut lines = text.lines();
    match lines.next() {
        Some(HEADER) => {}
        other => return Err(fail(1, format!("unexpected header {other:?}"))),
    }
    let mut out = Vec::new();
    for (i, line) in lines.enumerate() {
        let n = i + 2;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 12 {
            return Err(fail(n, format!("expected 12 fields, got {}", fields.len())));
        }
        let mut v = [0.0; 11];
        for (slot, f) in v.iter_mut().zip(&fields) {
            *slot = f.parse().map_err(|e| fail(n, format!("{f:?}: {e}")))?;
        }
        out.push(DiagnosticsRow {
            t: v[0],
            dt: v[1],
            e_total: v[2],
            e_a: v[3],
            e_b: v[4],
            h1_a: v[5],
            h1_b: v[6],
            e_gamma: v[7],
            l: v[8],
            min_a: v[9],
            min_b: v[10],
            status: fields[11].to_string(),
        });
    }
    Ok(out)
}

/// `<dir>/<stem>.events.json` next to `<dir>/<stem>.csv`.
pub fn events_path(csv: &Path) -> PathBuf {
    let stem = csv.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    csv.with_file_name(format!("{stem}.events.json"))
}

#[derive(Serialize)]
struct EventsFile<'a> {
    status: dyadic_core::RunStatus,
    accepted_steps: u64,
    rejected_steps: u64,
    events: &'a [dyadic_core::EventRecord],
}

/// Writes the CSV and its events file; returns the events path.
pub fn write_timeseries(
    traj: &Trajectory,
    params: &ModelParams,
    gamma: f64,
    path: &Path,
) -> Result<PathBuf, LabError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| LabError::io(dir, e))?;
    }
    let body = render_csv(&rows(traj, params, gamma)?);
    fs::write(path, body).map_err(|e| LabError::io(path, e))?;
    let ev = events_path(path);
    let json = serde_json::to_string_pretty(&EventsFile {
        status: traj.status,
        accepted_steps: traj.accepted_steps,
        rejected_steps: traj.rejected_steps,
        events: &traj.events,
    })
    .expect("events serialize");
    fs::write(&ev, json + "\n").map_err(|e| LabError::io(&ev, e))?;
    Ok(ev)
}

pub fn read_timeseries(path: &Path) -> Result<Vec<DiagnosticsRow>, LabError> {
    let text = fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
    parse_csv(&text, path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use dyadic_core::{integrate, make_params, Exponent, IntegratorOptions, RhsSelector, ShellState};

    #[test]
    fn zero_run_has_zero_numeric_columns() {
        let p = make_params(2.0, Exponent::Theta(1.0), 0.1, 0.1, 1.0, 4, None).unwrap();
        let opts = IntegratorOptions {
            t_end: 0.05,
            sample_dt: 0.01,
            ..Default::default()
        };
        let tr = integrate(&ShellState::zeros(4), &p, &opts, &RhsSelector::Galerkin).unwrap();
        let r = rows(&tr, &p, 0.05).unwrap();
        assert_eq!(r.len(), tr.samples.len());
        for row in &r {
            for v in [row.e_total, row.e_a, row.e_b, row.h1_a, row.h1_b, row.e_gamma, row.l, row.min_a, row.min_b] {
                assert_eq!(v, 0.0);
            }
        }
        assert_eq!(r.last().unwrap().status, "Completed");
        assert!(r[..r.len() - 1].iter().all(|x| x.status == "Running"));
    }

    #[test]
    fn awkward_floats_round_trip() {
        let row = DiagnosticsRow {
            t: 0.1 + 0.2,
            dt: 1e-300,
            e_total: 123456789.123456789,
            e_a: f64::MIN_POSITIVE,
            e_b: 5e-324,
            h1_a: 1e22,
            h1_b: -0.0,
            e_gamma: f64::NAN,
            l: f64::INFINITY,
            min_a: -1.5,
            min_b: 2.0,
            status: "Overflow".into(),
        };
        let text = render_csv(std::slice::from_ref(&row));
        let back = parse_csv(&text, Path::new("x.csv")).unwrap();
        assert_eq!(render_csv(&back), text);
    }

    #[test]
    fn bad_header_rejected() {
        assert!(parse_csv("t,dt\n", Path::new("x.csv")).is_err());
    }
}
