use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dyadic_core::regime::classify;
use dyadic_core::{blowup_constants, check_triple_bounds, integrate, RhsSelector};
use dyadic_lab::config::{Format, RunConfig};
use dyadic_lab::experiments::{exp_decay_bound, exp_dissipation_budget, Criterion, ExperimentReport};
use dyadic_lab::{parse_config, sweep_run, write_timeseries, LabError};

/// Simulate and verify dyadic Hall-MHD shell models.
#[derive(Parser)]
#[command(name = "dyadic", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one configuration and write its time series.
    Simulate {
        config: PathBuf,
        /// Output directory; overrides `output.directory`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every point of the configuration's sweep grid.
    Sweep {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the blow-up certificate constants as JSON.
    Constants {
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        gamma: f64,
        #[arg(long)]
        theta: f64,
        #[arg(long)]
        nu: f64,
        #[arg(long)]
        mu: f64,
    },
    /// Check the invariant suite on a short trajectory (at most one time unit).
    Verify {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Classify the exponent pair into a well-posedness regime.
    Regime {
        #[arg(long)]
        theta: f64,
        #[arg(long = "d_i", alias = "d-i")]
        d_i: f64,
    },
}

fn load(path: &Path) -> Result<RunConfig, LabError> {
    let text = fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
    parse_config(&text)
}

fn out_dir(cfg: &RunConfig, out: Option<PathBuf>) -> PathBuf {
    out.unwrap_or_else(|| cfg.output.directory.clone())
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<(), LabError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| LabError::io(dir, e))?;
    }
    let text = serde_json::to_string_pretty(value).expect("serializable") + "\n";
    fs::write(path, text).map_err(|e| LabError::io(path, e))
}

fn simulate(config: &Path, out: Option<PathBuf>) -> Result<bool, LabError> {
    let cfg = load(config)?;
    let params = cfg.params()?;
    let state0 = cfg.initial_state()?;
    let traj = integrate(&state0, &params, &cfg.integrator, &cfg.selector())?;
    let dir = out_dir(&cfg, out);
    fs::create_dir_all(&dir).map_err(|e| LabError::io(&dir, e))?;
    let summary = serde_json::json!({
        "status": traj.status,
        "end_time": traj.end(),
        "samples": traj.samples.len(),
        "accepted_steps": traj.accepted_steps,
        "rejected_steps": traj.rejected_steps,
        "events": traj.events,
        "regime": dyadic_core::classify_regime(&params),
    });
    if cfg.output.wants(Format::Csv) {
        write_timeseries(&traj, &params, cfg.blowup.gamma, &dir.join("timeseries.csv"))?;
    }
    if cfg.output.wants(Format::Json) {
        write_json(&dir.join("summary.json"), &summary)?;
        write_json(&dir.join("config.json"), &cfg)?;
    }
    println!("{}", serde_json::to_string_pretty(&summary).expect("serializable"));
    Ok(true)
}

fn sweep(config: &Path, out: Option<PathBuf>) -> Result<bool, LabError> {
    let cfg = load(config)?;
    let grid = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| LabError::Config("sweep: configuration has no sweep section".into()))?;
    eprintln!("sweep: {} grid points", grid.size()?);
    let dir = out_dir(&cfg, out);
    fs::create_dir_all(&dir).map_err(|e| LabError::io(&dir, e))?;
    let points = sweep_run(&cfg, Some(&dir))?;
    let mut ok = true;
    for p in &points {
        let failed = p.error.is_some() || p.report.as_ref().is_some_and(|r| !r.passed());
        ok &= !failed;
        println!(
            "point {:>4} {:?} {:?} status {:?} end {:?} divergence {:?}{}",
            p.index,
            p.report.as_ref().map(|r| r.verdict()),
            p.values,
            p.status,
            p.end_time,
            p.divergence_time,
            p.error.as_deref().map(|e| format!(" error: {e}")).unwrap_or_default()
        );
    }
    Ok(ok)
}

fn constants(lambda: f64, gamma: f64, theta: f64, nu: f64, mu: f64) -> Result<bool, LabError> {
    let c = blowup_constants(gamma, lambda, theta, nu, mu)?;
    let value = serde_json::json!({ "constants": c, "conditions": c.conditions(), "valid": c.is_valid() });
    println!("{}", serde_json::to_string_pretty(&value).expect("serializable"));
    Ok(true)
}

fn verify(config: &Path, out: Option<PathBuf>) -> Result<bool, LabError> {
    let mut cfg = load(config)?;
    let params = cfg.params()?;
    let selector = cfg.selector();
    let state0 = cfg.initial_state()?;
    cfg.integrator.t_end = cfg.integrator.t_end.min(state0.t + 1.0);

    let mut report = ExperimentReport {
        name: "verify".into(),
        params: serde_json::json!({ "model": params, "integrator": cfg.integrator }),
        criteria: Vec::new(),
        artifacts: Vec::new(),
    };

    if selector == RhsSelector::Galerkin {
        let sys = selector.build(&params)?;
        let k = params.k;
        let (mut da, mut db) = (vec![0.0; k], vec![0.0; k]);
        sys.nonlinear(&state0.a, &state0.b, &mut da, &mut db);
        let flux: f64 = state0.a.iter().zip(&da).chain(state0.b.iter().zip(&db)).map(|(x, d)| x * d).sum();
        let scale = dyadic_core::flux_scale(&state0, &params)?;
        let rel = if scale == 0.0 { 0.0 } else { flux.abs() / scale };
        report.criteria.push(Criterion {
            name: "flux_cancellation".into(),
            anchor: "the nonlinear terms carry no net energy",
            pass: Some(rel <= 1e-12),
            measured: rel,
            threshold: 1e-12,
            note: String::new(),
        });
    }

    let budget = exp_dissipation_budget(&params, &selector, &state0, &cfg.integrator, 1e-6)?;
    report.criteria.extend(budget.report.criteria);
    if !params.is_forced() {
        let decay = exp_decay_bound(&params, &selector, &state0, &cfg.integrator, 1e-8)?;
        report.criteria.extend(decay.report.criteria);
    }
    if state0.min_entry() >= 0.0 {
        let t = check_triple_bounds(&state0, cfg.blowup.gamma, params.theta, params.lambda)?;
        report.criteria.push(Criterion {
            name: "triple_bounds".into(),
            anchor: "cubic and neighbour-product bounds for positive sequences",
            pass: Some(t.all_hold()),
            measured: f64::NAN,
            threshold: f64::NAN,
            note: format!("{t:?}"),
        });
    }

    for c in &report.criteria {
        let tag = match c.pass {
            Some(true) => "PASS",
            Some(false) => "FAIL",
            None => "INFO",
        };
        println!("{tag} {}: measured {:e}, threshold {:e}", c.name, c.measured, c.threshold);
    }
    if let Some(dir) = out {
        write_json(&dir.join("verify.json"), &report)?;
    }
    Ok(report.passed())
}

fn regime(theta: f64, d_i: f64) -> Result<bool, LabError> {
    if !theta.is_finite() || !(d_i >= 0.0) || !d_i.is_finite() {
        return Err(LabError::Config("regime: theta must be finite and d_i non-negative".into()));
    }
    println!("{}", serde_json::to_string_pretty(&classify(theta, d_i)).expect("serializable"));
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate { config, out } => simulate(&config, out),
        Command::Sweep { config, out } => sweep(&config, out),
        Command::Constants {
            lambda,
            gamma,
            theta,
            nu,
            mu,
        } => constants(lambda, gamma, theta, nu, mu),
        Command::Verify { config, out } => verify(&config, out),
        Command::Regime { theta, d_i } => regime(theta, d_i),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
