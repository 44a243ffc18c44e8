//! Energy law, dissipation budget and the energy inequality on sampled
//! trajectories.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::integrator::Trajectory;
use crate::model::RhsSelector;
use crate::norms::weighted_square_sum;
use crate::params::ModelParams;
use crate::state::{Derivative, ShellState};
use crate::sum::Neumaier;

/// Default relative tolerance of [`leray_hopf_check`].
pub const LERAY_HOPF_RTOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct EnergyBudget {
    pub times: Vec<f64>,
    /// `|a|^2 + |b|^2`.
    pub energy: Vec<f64>,
    /// `2 (nu ||a||_1^2 + mu ||b||_1^2) - 2 f . b`.
    pub dissipation: Vec<f64>,
    /// `dE/dt + dissipation` from the right-hand side; zero in exact arithmetic.
    pub instant_residual: Vec<f64>,
    /// `E(t) + int_0^t dissipation - E(0)`, trapezoid rule on the samples.
    pub cumulative_residual: Vec<f64>,
    /// `exp(-2 min(nu, mu) t) E(0) - E(t)`.
    pub decay_margin: Vec<f64>,
}

impl EnergyBudget {
    pub fn initial_energy(&self) -> f64 {
        self.energy[0]
    }

    pub fn max_abs_cumulative(&self) -> f64 {
        self.cumulative_residual.iter().fold(0.0, |m, r| m.max(r.abs()))
    }

    pub fn max_abs_instant(&self) -> f64 {
        self.instant_residual.iter().fold(0.0, |m, r| m.max(r.abs()))
    }

    pub fn min_decay_margin(&self) -> f64 {
        self.decay_margin.iter().fold(f64::INFINITY, |m, &r| m.min(r))
    }

    /// Cumulative dissipation integral up to sample `i`.
    pub fn dissipated(&self, i: usize) -> f64 {
        self.cumulative_residual[i] - self.energy[i] + self.energy[0]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct LerayHopfReport {
    pub pass: bool,
    /// `E(t1) - E(t) - int_{t1}^{t} dissipation`; non-negative for a
    /// Leray-Hopf solution.
    pub slack: f64,
    pub tolerance: f64,
}

/// Dissipation rate `2 (nu ||a||_1^2 + mu ||b||_1^2) - 2 f . b`.
fn dissipation_rate(state: &ShellState, params: &ModelParams) -> f64 {
    let mut acc = Neumaier::default();
    acc.add(2.0 * params.nu * weighted_square_sum(&state.a, 2.0, params.lambda));
    acc.add(2.0 * params.mu * weighted_square_sum(&state.b, 2.0, params.lambda));
    for (f, b) in params.forcing_b.iter().zip(&state.b) {
        acc.add(-2.0 * f * b);
    }
    acc.total()
}

/// Budget of the Galerkin model.
pub fn energy_budget(traj: &Trajectory, params: &ModelParams) -> Result<EnergyBudget> {
    energy_budget_with(traj, params, &RhsSelector::Galerkin)
}

pub fn energy_budget_with(
    traj: &Trajectory,
    params: &ModelParams,
    selector: &RhsSelector,
) -> Result<EnergyBudget> {
    if traj.samples.is_empty() {
        return Err(Error::TooFewSamples { needed: 1, got: 0 });
    }
    let sys = selector.build(params)?;
    let k = sys.shells();
    let n = traj.samples.len();
    let mut out = EnergyBudget {
        times: Vec::with_capacity(n),
        energy: Vec::with_capacity(n),
        dissipation: Vec::with_capacity(n),
        instant_residual: Vec::with_capacity(n),
        cumulative_residual: Vec::with_capacity(n),
        decay_margin: Vec::with_capacity(n),
    };
    let t0 = traj.samples[0].t;
    let rate = 2.0 * params.nu.min(params.mu);
    let mut d = Derivative::zeros(k);
    let mut integral = Neumaier::default();
    for (i, s) in traj.samples.iter().enumerate() {
        s.state.check_len(k)?;
        let e = s.state.energy();
        let diss = dissipation_rate(&s.state, params);
        sys.rhs(&s.state.a, &s.state.b, &mut d.da, &mut d.db);
        let de = 2.0 * d.energy_rate(&s.state);

        if i > 0 {
            let dt = s.t - out.times[i - 1];
            integral.add(0.5 * dt * (out.dissipation[i - 1] + diss));
        }
        let e0 = out.energy.first().copied().unwrap_or(e);
        let mut cum = Neumaier::default();
        cum.add(e);
        cum.add(integral.total());
        cum.add(-e0);

        out.times.push(s.t);
        out.energy.push(e);
        out.dissipation.push(diss);
        out.instant_residual.push(de + diss);
        out.cumulative_residual.push(cum.total());
        out.decay_margin.push(libm::exp(-rate * (s.t - t0)) * e0 - e);
    }
    Ok(out)
}

/// Piecewise-linear value of `ys` at `t` on the grid `ts`.
fn interpolate(ts: &[f64], ys: &[f64], t: f64) -> f64 {
    let i = ts.partition_point(|&x| x <= t);
    if i == 0 {
        return ys[0];
    }
    if i >= ts.len() {
        return ys[ts.len() - 1];
    }
    let (ta, tb) = (ts[i - 1], ts[i]);
    if t == ta {
        return ys[i - 1];
    }
    let w = (t - ta) / (tb - ta);
    ys[i - 1] + w * (ys[i] - ys[i - 1])
}

/// Energy inequality `E(t) + int_{t1}^t dissipation <= E(t1)` on the Galerkin
/// model, with tolerance `LERAY_HOPF_RTOL * max(E(t1), E(t))`.
pub fn leray_hopf_check(
    traj: &Trajectory,
    params: &ModelParams,
    t1: f64,
    t: f64,
) -> Result<LerayHopfReport> {
    leray_hopf_check_tol(traj, params, t1, t, LERAY_HOPF_RTOL)
}

pub fn leray_hopf_check_tol(
    traj: &Trajectory,
    params: &ModelParams,
    t1: f64,
    t: f64,
    rtol: f64,
) -> Result<LerayHopfReport> {
    let budget = energy_budget(traj, params)?;
    let (start, end) = (traj.start(), traj.end());
    for &x in &[t1, t] {
        if !(x >= start && x <= end) {
            return Err(Error::OutsideSpan { t: x, start, end });
        }
    }
    if t1 > t {
        return Err(Error::ReversedInterval { t1, t });
    }
    let dissipated: Vec<f64> = (0..budget.times.len()).map(|i| budget.dissipated(i)).collect();
    let e1 = interpolate(&budget.times, &budget.energy, t1);
    let e2 = interpolate(&budget.times, &budget.energy, t);
    let q1 = interpolate(&budget.times, &dissipated, t1);
    let q2 = interpolate(&budget.times, &dissipated, t);
    let slack = if t1 == t { 0.0 } else { e1 - e2 - (q2 - q1) };
    let tolerance = rtol * e1.max(e2);
    Ok(LerayHopfReport {
        pass: slack >= -tolerance,
        slack,
        tolerance,
    })
}
