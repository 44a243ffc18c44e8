//! Acceptance suite: one line per criterion.
//!
//! Criteria 5 and 8 are known failures. Their lines read `FAIL (known)` and
//! do not fail the run; any other failure does. A known failure that starts
//! passing is reported as `PASS (unexpected)` and also does not fail the run.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use dyadic_core::blowup::{lyapunov_value, sandwich_bounds, sharp_upper_bound};
use dyadic_core::{
    blowup_constants, check_triple_bounds, flux_scale, integrate, make_params, step, Exponent,
    IntegratorOptions, ModelParams, RhsSelector, RunStatus, ShellState,
};
use dyadic_lab::experiments::{
    exp_blowup, exp_decay_bound, exp_dissipation_budget, exp_energy_conservation,
    exp_galerkin_convergence, BlowupSetup,
};
use dyadic_lab::DataSpec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

struct Criterion {
    id: u32,
    name: &'static str,
    budget: Duration,
    known_failure: bool,
    run: fn() -> Outcome,
}

fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

fn theta_params(lambda: f64, theta: f64, nu: f64, d_i: f64, k: usize) -> ModelParams {
    make_params(lambda, Exponent::Theta(theta), nu, nu, d_i, k, None).unwrap()
}

// 1. Discrete energy flux of the nonlinearity cancels.
fn flux_cancellation() -> Outcome {
    const TOL: f64 = 1e-12;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    let mut count = 0;
    for theta in [1.0, 1.5, 2.5] {
        let p = theta_params(2.0, theta, 0.0, 1.0, 16);
        let sys = RhsSelector::Galerkin.build(&p).unwrap();
        for _ in 0..1000 {
            let mut draw = || (0..16).map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<f64>>();
            let s = ShellState::new(draw(), draw()).unwrap();
            let (mut da, mut db) = (vec![0.0; 16], vec![0.0; 16]);
            sys.rhs(&s.a, &s.b, &mut da, &mut db);
            let flux: f64 = s.a.iter().zip(&da).chain(s.b.iter().zip(&db)).map(|(x, d)| x * d).sum();
            worst = worst.max(flux.abs() / flux_scale(&s, &p).unwrap());
            count += 1;
        }
    }
    Outcome {
        pass: worst <= TOL,
        detail: format!("{count} states, max |flux|/scale {worst:.3e} (tolerance {TOL:e})"),
    }
}

// 2. Inviscid energy conservation in time.
//
// Hall term off: with it on, the k=24 explicit stability limit costs about
// 2e7 steps. `a = b` is an equilibrium of the Hall-free system, so b_1 is
// halved to make the run nontrivial.
fn energy_conservation() -> Outcome {
    let p = theta_params(2.0, 1.0, 0.0, 0.0, 24);
    let a: Vec<f64> = (1..=24).map(|j| p.wavenumber(j).recip()).collect();
    let mut b = a.clone();
    b[0] *= 0.5;
    let s0 = ShellState::new(a, b).unwrap();
    let opts = IntegratorOptions {
        rtol: 1e-10,
        atol: 1e-14,
        t_end: 1.0,
        sample_dt: 0.01,
        ..Default::default()
    };
    let o = exp_energy_conservation(&p, &RhsSelector::Galerkin, &s0, &opts).unwrap();
    let c = &o.report.criteria[0];
    Outcome {
        pass: o.report.passed(),
        detail: format!(
            "k=24, d_i=0, data lambda_j^-1 (b_1 halved), drift {:.3e} (tolerance {:e}); {}",
            c.measured, c.threshold, c.note
        ),
    }
}

// 3. Exponential energy decay bound.
fn decay_bound() -> Outcome {
    const TOL: f64 = 1e-8;
    let p = theta_params(2.0, 1.0, 0.1, 1.0, 16);
    let s0 = DataSpec::Geometric {
        amplitude: 1.0,
        decay: 1.0,
    }
    .build(&p, 0.05)
    .unwrap();
    let opts = IntegratorOptions {
        rtol: 1e-10,
        atol: 1e-14,
        t_end: 5.0,
        sample_dt: 0.01,
        ..Default::default()
    };
    let o = exp_decay_bound(&p, &RhsSelector::Galerkin, &s0, &opts, TOL).unwrap();
    let c = &o.report.criteria[0];
    Outcome {
        pass: o.report.passed(),
        detail: format!("k=16, t in [0,5], max relative excess {:.3e} (tolerance {TOL:e}); {}", c.measured, c.note),
    }
}

// 4. Dissipation budget with trapezoid quadrature. Smooth data: with
// lambda_j^-1 the quadrature error of the initial transient alone is ~3e-3.
fn dissipation_budget() -> Outcome {
    const TOL: f64 = 1e-6;
    let p = theta_params(2.0, 1.0, 0.1, 1.0, 16);
    let s0 = DataSpec::Geometric {
        amplitude: 1.0,
        decay: 2.0,
    }
    .build(&p, 0.05)
    .unwrap();
    let opts = IntegratorOptions {
        rtol: 1e-11,
        atol: 1e-15,
        t_end: 1.0,
        sample_dt: 1e-3,
        ..Default::default()
    };
    let o = exp_dissipation_budget(&p, &RhsSelector::Galerkin, &s0, &opts, TOL).unwrap();
    let r = o.report.criterion("max_relative_residual").unwrap();
    let lh = o.report.criterion("leray_hopf_slack").unwrap();
    Outcome {
        pass: o.report.passed(),
        detail: format!(
            "k=16, data lambda_j^-2, sample_dt 1e-3, max relative residual {:.3e} (tolerance {TOL:e}), Leray-Hopf slack {:.3e}",
            r.measured, lh.measured
        ),
    }
}

fn fixture() -> (ModelParams, ShellState) {
    let p = theta_params(2.0, 1.0, 0.0, 1.0, 2);
    (p, ShellState::new(vec![1.0, 1.0], vec![1.0, 1.0]).unwrap())
}

fn max_diff(u: &ShellState, v: &ShellState) -> f64 {
    u.a.iter().zip(&v.a).chain(u.b.iter().zip(&v.b)).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let num: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    num / den
}

fn fixed_step(p: &ModelParams, s0: &ShellState, n: usize) -> ShellState {
    let opts = IntegratorOptions::default();
    let h = 1.0 / n as f64;
    let mut s = s0.clone();
    for _ in 0..n {
        s = step(&s, h, p, &RhsSelector::Galerkin, &opts).unwrap().0;
    }
    s
}

// 5. Convergence slope of error against tolerance.
fn integrator_order() -> Outcome {
    const MIN_SLOPE: f64 = 4.5;
    let (p, s0) = fixture();
    let reference = fixed_step(&p, &s0, 1 << 14);
    let tols = [1e-6, 1e-7, 1e-8, 1e-9, 1e-10];
    let mut errs = Vec::new();
    let mut mean_h = Vec::new();
    for &tol in &tols {
        let opts = IntegratorOptions {
            rtol: tol,
            atol: tol,
            t_end: 1.0,
            sample_dt: 1.0,
            ..Default::default()
        };
        let tr = integrate(&s0, &p, &opts, &RhsSelector::Galerkin).unwrap();
        assert_eq!(tr.status, RunStatus::Completed);
        errs.push(max_diff(tr.last_state().unwrap(), &reference));
        mean_h.push(1.0 / tr.accepted_steps as f64);
    }
    let tol_slope = slope(&tols, &errs);
    let h_slope = slope(&mean_h, &errs);
    let ns = [64usize, 128, 256, 512];
    let fixed_errs: Vec<f64> = ns.iter().map(|&n| max_diff(&fixed_step(&p, &s0, n), &reference)).collect();
    let hs: Vec<f64> = ns.iter().map(|&n| 1.0 / n as f64).collect();
    let fixed_slope = slope(&hs, &fixed_errs);
    Outcome {
        pass: tol_slope >= MIN_SLOPE,
        detail: format!(
            "slope of error vs tolerance {tol_slope:.2} (need {MIN_SLOPE}); error vs mean step {h_slope:.2}; fixed-step order {fixed_slope:.2}; errors {}",
            errs.iter().map(|e| format!("{e:.2e}")).collect::<Vec<_>>().join(" ")
        ),
    }
}

// 6. Certificate constants against a 50-digit evaluation.
fn certificate() -> Outcome {
    const TOL: f64 = 1e-12;
    let c = blowup_constants(0.05, 20.0, 3.5, 0.01, 0.01).unwrap();
    let oracle = [
        ("epsilon", c.epsilon, 0.27144176165949065715),
        ("c1", c.c1, 0.04105064962604086553),
        ("c2", c.c2, 0.073891169326873557954),
        ("c3", c.c3, 0.0079738262978760259208),
        ("c0", c.c0, 3.7178877043475848299),
        ("sandwich", c.sandwich, 1.0049476226622491171),
        ("M1", c.m1, 0.059839966875618959506),
        ("M0", c.m0, 8.0939405556264343056),
        ("riccati C", c.riccati_c, 0.0073567823360228774825),
    ];
    let worst = oracle.iter().map(|(_, g, w)| ((g - w) / w).abs()).fold(0.0, f64::max);
    let weak = blowup_constants(0.05, 2.0, 3.5, 0.01, 0.01).unwrap();
    Outcome {
        pass: worst <= TOL && c.conditions() == [true; 4] && c.is_valid(),
        detail: format!(
            "lambda=20: max relative deviation {worst:.2e} (tolerance {TOL:e}), conditions {:?}; lambda=2: conditions {:?}, status {:?}",
            c.conditions(),
            weak.conditions(),
            weak.status
        ),
    }
}

// 7. Blow-up scenario.
fn blowup() -> Outcome {
    let opts = IntegratorOptions {
        rtol: 1e-8,
        atol: 1e-12,
        sample_dt: 0.01,
        ..Default::default()
    };
    let o = exp_blowup(&BlowupSetup::default(), &opts).unwrap();
    let r = o.report.criterion("riccati_lower_bound").unwrap();
    let t = o.report.criterion("terminates_by_window").unwrap();
    let samples = o.runs[0].traj.samples.len();
    // A run that dies before its second sample satisfies the letter of the
    // criterion without exercising the Riccati comparison.
    let vacuous = if samples < 2 { "; vacuous: no sample after t=0" } else { "" };
    Outcome {
        pass: o.report.passed(),
        detail: format!(
            "Riccati: {}; end {:.3e} within window {:.3e}: {}; {samples} samples{vacuous}",
            r.note, t.measured, t.threshold, t.note
        ),
    }
}

// 8. Triple-product bounds and the Lyapunov sandwich on random states.
fn triple_and_sandwich() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let c = blowup_constants(0.05, 20.0, 3.5, 0.01, 0.01).unwrap();
    let (mut triple_bad, mut lower_bad, mut upper_bad, mut sharp_bad) = (0, 0, 0, 0);
    for _ in 0..1000 {
        let mut draw = || (0..16).map(|_| rng.gen::<f64>()).collect::<Vec<f64>>();
        let s = ShellState::new(draw(), draw()).unwrap();
        if !check_triple_bounds(&s, c.gamma, c.theta, c.lambda).unwrap().all_hold() {
            triple_bad += 1;
        }
        let l = lyapunov_value(&s, &c);
        let (lo, hi) = sandwich_bounds(&s, &c);
        let tol = 1e-12 * hi;
        lower_bad += usize::from(l < lo - tol);
        upper_bad += usize::from(l > hi + tol);
        sharp_bad += usize::from(l > sharp_upper_bound(&s, &c) + tol);
    }
    Outcome {
        pass: triple_bad + lower_bad + upper_bad == 0,
        detail: format!(
            "1000 states at lambda=20: triple violations {triple_bad}, sandwich lower {lower_bad}, sandwich upper {upper_bad}; sharp upper bound {sharp_bad}"
        ),
    }
}

// 9. Galerkin self-convergence.
fn galerkin_convergence() -> Outcome {
    let p = theta_params(2.0, 1.0, 1e-6, 0.0, 8);
    let data = DataSpec::Explicit {
        a: vec![5.0, 2.5],
        b: vec![5.0, 1.25],
    };
    let opts = IntegratorOptions {
        rtol: 1e-11,
        atol: 1e-15,
        t_end: 1.0,
        sample_dt: 0.01,
        ..Default::default()
    };
    let o = exp_galerkin_convergence(&p, &[8, 12, 16], &data, &opts).unwrap();
    let ds: Vec<String> = ["d_w_8_16", "d_w_12_24", "d_w_16_32"]
        .iter()
        .map(|n| format!("{:.2e}", o.report.criterion(n).unwrap().measured))
        .collect();
    let lh_ok = o.report.criteria.iter().filter(|c| c.name.starts_with("leray_hopf")).all(|c| c.pass == Some(true));
    Outcome {
        pass: o.report.passed(),
        detail: format!("d_i=0, nu=mu=1e-6: d_w {} ; Leray-Hopf on every run: {lh_ok}", ds.join(", ")),
    }
}

fn main() -> ExitCode {
    let criteria = [
        Criterion { id: 1, name: "flux cancellation", budget: secs(1), known_failure: false, run: flux_cancellation },
        Criterion { id: 2, name: "energy conservation", budget: secs(10), known_failure: false, run: energy_conservation },
        Criterion { id: 3, name: "decay bound", budget: secs(10), known_failure: false, run: decay_bound },
        Criterion { id: 4, name: "dissipation budget", budget: secs(30), known_failure: false, run: dissipation_budget },
        Criterion { id: 5, name: "integrator order", budget: secs(5), known_failure: true, run: integrator_order },
        Criterion { id: 6, name: "certificate arithmetic", budget: secs(1), known_failure: false, run: certificate },
        Criterion { id: 7, name: "blow-up scenario", budget: secs(60), known_failure: false, run: blowup },
        Criterion { id: 8, name: "triple bounds and sandwich", budget: secs(1), known_failure: true, run: triple_and_sandwich },
        Criterion { id: 9, name: "Galerkin self-convergence", budget: secs(30), known_failure: false, run: galerkin_convergence },
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut unexpected = 0;
    for c in &criteria {
        if !filter.is_empty() && !filter.iter().any(|f| c.id.to_string() == *f) {
            continue;
        }
        let start = Instant::now();
        let out = (c.run)();
        let elapsed = start.elapsed();
        let in_time = elapsed <= c.budget;
        let pass = out.pass && in_time;
        let tag = match (pass, c.known_failure) {
            (true, false) => "PASS",
            (true, true) => "PASS (unexpected)",
            (false, true) => "FAIL (known)",
            (false, false) => {
                unexpected += 1;
                "FAIL"
            }
        };
        println!(
            "{tag} criterion {} {}: {} [{:.2} s, budget {} s{}]",
            c.id,
            c.name,
            out.detail,
            elapsed.as_secs_f64(),
            c.budget.as_secs(),
            if in_time { "" } else { ", over budget" }
        );
    }
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{unexpected} unexpected failure(s)");
        ExitCode::FAILURE
    }
}
