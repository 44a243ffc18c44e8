//! Adaptive time stepping with event detection.

mod lawson;
mod phi;
mod tableau;

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::model::{RhsSelector, ShellSystem};
use crate::params::ModelParams;
use crate::state::ShellState;
use crate::sum::Neumaier;

use lawson::{error_norm, Lawson};

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;
/// Energy growth beyond `ANOMALY_FACTOR * rtol * max(elapsed, 1) * E(0)`
/// in an unforced run is reported.
const ANOMALY_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct IntegratorOptions {
    pub rtol: f64,
    pub atol: f64,
    pub dt_init: f64,
    pub dt_min: f64,
    pub dt_max: f64,
    /// Absolute end time.
    pub t_end: f64,
    pub sample_dt: f64,
    pub positivity_watch: bool,
    pub overflow_guard: f64,
    /// Accepted plus rejected steps before the run is abandoned.
    pub max_steps: u64,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-8,
            atol: 1e-12,
            dt_init: 1e-4,
            dt_min: 1e-14,
            dt_max: 1.0,
            t_end: 1.0,
            sample_dt: 1e-2,
            positivity_watch: false,
            overflow_guard: 1e150,
            max_steps: 20_000_000,
        }
    }
}

impl IntegratorOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.rtol > 0.0 && self.rtol.is_finite()) {
            return Err(Error::InvalidOptions("rtol must be positive"));
        }
        if !(self.atol > 0.0 && self.atol.is_finite()) {
            return Err(Error::InvalidOptions("atol must be positive"));
        }
        if !(self.dt_min >= 0.0 && self.dt_min <= self.dt_init && self.dt_init <= self.dt_max) {
            return Err(Error::InvalidOptions("need dt_min <= dt_init <= dt_max"));
        }
        if !(self.dt_init > 0.0 && self.dt_max.is_finite()) {
            return Err(Error::InvalidOptions("dt_init must be positive and dt_max finite"));
        }
        if !(self.sample_dt > 0.0 && self.sample_dt.is_finite()) {
            return Err(Error::InvalidOptions("sample_dt must be positive"));
        }
        if !self.t_end.is_finite() {
            return Err(Error::InvalidOptions("t_end must be finite"));
        }
        if !(self.overflow_guard > 0.0) {
            return Err(Error::InvalidOptions("overflow_guard must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum RunStatus {
    Completed,
    BlowupSuspected,
    Overflow,
    /// The step budget ran out before `t_end`.
    StepCollapse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum EventKind {
    PositivityLoss,
    BlowupSuspected,
    Overflow,
    StepCollapse,
    EnergyAnomaly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Field {
    A,
    B,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EventRecord {
    pub kind: EventKind,
    pub t: f64,
    /// 1-based shell index, with the field it refers to.
    pub shell: Option<(Field, usize)>,
    pub magnitude: Option<f64>,
    /// For abnormal ends: last accepted time and the end of the failed trial.
    pub bracket: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Sample {
    pub t: f64,
    /// Size of the accepted step the sample was taken from (0 at the start).
    pub dt: f64,
    pub state: ShellState,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub events: Vec<EventRecord>,
    pub status: RunStatus,
    pub accepted_steps: u64,
    pub rejected_steps: u64,
}

impl Trajectory {
    pub fn start(&self) -> f64 {
        self.samples.first().map_or(0.0, |s| s.t)
    }

    pub fn end(&self) -> f64 {
        self.samples.last().map_or(0.0, |s| s.t)
    }

    pub fn last_state(&self) -> Option<&ShellState> {
        self.samples.last().map(|s| &s.state)
    }

    pub fn first_event(&self, kind: EventKind) -> Option<&EventRecord> {
        self.events.iter().find(|e| e.kind == kind)
    }
}

fn flatten(state: &ShellState) -> Vec<f64> {
    let mut y = Vec::with_capacity(2 * state.len());
    y.extend_from_slice(&state.a);
    y.extend_from_slice(&state.b);
    y
}

fn unflatten(y: &[f64], t: f64) -> ShellState {
    let k = y.len() / 2;
    ShellState {
        a: y[..k].to_vec(),
        b: y[k..].to_vec(),
        t,
    }
}

fn flat_energy(y: &[f64]) -> f64 {
    y.iter().map(|v| v * v).collect::<Neumaier>().total()
}

fn first_negative(y: &[f64]) -> Option<(Field, usize, f64)> {
    let k = y.len() / 2;
    y.iter().position(|&v| v < 0.0).map(|c| {
        if c < k {
            (Field::A, c + 1, y[c])
        } else {
            (Field::B, c - k + 1, y[c])
        }
    })
}

/// One integrating-factor step of size `dt`. Returns the new state and the
/// weighted RMS norm of the embedded error (accept when `<= 1`).
pub fn step(
    state: &ShellState,
    dt: f64,
    params: &ModelParams,
    selector: &RhsSelector,
    opts: &IntegratorOptions,
) -> Result<(ShellState, f64)> {
    let sys = selector.build(params)?;
    step_system(&*sys, state, dt, opts)
}

pub fn step_system<S: ShellSystem + ?Sized>(
    sys: &S,
    state: &ShellState,
    dt: f64,
    opts: &IntegratorOptions,
) -> Result<(ShellState, f64)> {
    state.check_len(sys.shells())?;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidOptions("dt must be positive"));
    }
    let y = flatten(state);
    let mut out = vec![0.0; y.len()];
    let mut err = vec![0.0; y.len()];
    let mut stepper = Lawson::new(sys);
    stepper.attempt(&y, dt, &mut out, &mut err);
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::Overflow { t: state.t });
    }
    let e = error_norm(&err, &y, &out, opts.rtol, opts.atol);
    Ok((unflatten(&out, state.t + dt), e))
}

/// Integrates from `state0.t` to `opts.t_end`.
///
/// Only invalid inputs are errors; every abnormal end is a [`RunStatus`].
pub fn integrate(
    state0: &ShellState,
    params: &ModelParams,
    opts: &IntegratorOptions,
    selector: &RhsSelector,
) -> Result<Trajectory> {
    let sys = selector.build(params)?;
    integrate_system(&*sys, state0, opts)
}

pub fn integrate_system<S: ShellSystem + ?Sized>(
    sys: &S,
    state0: &ShellState,
    opts: &IntegratorOptions,
) -> Result<Trajectory> {
    opts.validate()?;
    state0.check_len(sys.shells())?;
    if !state0.is_finite() {
        return Err(Error::NonFiniteEntry(
            flatten(state0).iter().position(|v| !v.is_finite()).unwrap_or(0),
        ));
    }
    Ok(Run::new(sys, state0, opts).run())
}

struct Run<'s, S: ShellSystem + ?Sized> {
    stepper: Lawson<'s, S>,
    opts: &'s IntegratorOptions,
    t0: f64,
    e0: f64,
    forced: bool,
    traj: Trajectory,
    next_sample: u64,
    positivity_lost: bool,
    anomaly_seen: bool,
}

impl<'s, S: ShellSystem + ?Sized> Run<'s, S> {
    fn new(sys: &'s S, state0: &ShellState, opts: &'s IntegratorOptions) -> Self {
        let y0 = flatten(state0);
        Self {
            stepper: Lawson::new(sys),
            opts,
            t0: state0.t,
            e0: flat_energy(&y0),
            forced: sys.is_forced(),
            traj: Trajectory {
                samples: vec![Sample {
                    t: state0.t,
                    dt: 0.0,
                    state: state0.clone(),
                }],
                events: Vec::new(),
                status: RunStatus::Completed,
                accepted_steps: 0,
                rejected_steps: 0,
            },
            next_sample: 1,
            positivity_lost: false,
            anomaly_seen: false,
        }
    }

    fn sample_time(&self, i: u64) -> f64 {
        self.t0 + i as f64 * self.opts.sample_dt
    }

    fn push_sample(&mut self, t: f64, dt: f64, y: &[f64]) {
        if self.traj.end() < t {
            self.traj.samples.push(Sample {
                t,
                dt,
                state: unflatten(y, t),
            });
        }
    }

    fn event(&mut self, kind: EventKind, t: f64) -> &mut EventRecord {
        self.traj.events.push(EventRecord {
            kind,
            t,
            shell: None,
            magnitude: None,
            bracket: None,
        });
        self.traj.events.last_mut().unwrap()
    }

    fn finish(&mut self, status: RunStatus, t: f64, h: f64, magnitude: Option<f64>) {
        let kind = match status {
            RunStatus::Completed => return,
            RunStatus::BlowupSuspected => EventKind::BlowupSuspected,
            RunStatus::Overflow => EventKind::Overflow,
            RunStatus::StepCollapse => EventKind::StepCollapse,
        };
        self.traj.status = status;
        let ev = self.event(kind, t);
        ev.magnitude = magnitude;
        ev.bracket = Some((t, t + h));
    }

    fn check_positivity(&mut self, t: f64, y: &[f64]) {
        if !self.opts.positivity_watch || self.positivity_lost {
            return;
        }
        if let Some((field, j, v)) = first_negative(y) {
            self.positivity_lost = true;
            let ev = self.event(EventKind::PositivityLoss, t);
            ev.shell = Some((field, j));
            ev.magnitude = Some(v);
        }
    }

    fn check_energy(&mut self, t: f64, y: &[f64]) {
        if self.forced || self.anomaly_seen {
            return;
        }
        let e = flat_energy(y);
        let allowed = ANOMALY_FACTOR * self.opts.rtol * libm::fmax(t - self.t0, 1.0) * self.e0;
        if e - self.e0 > allowed {
            self.anomaly_seen = true;
            self.event(EventKind::EnergyAnomaly, t).magnitude = Some((e - self.e0) / self.e0);
        }
    }

    fn run(mut self) -> Trajectory {
        let opts = self.opts;
        let t_end = opts.t_end;
        let mut t = self.t0;
        let mut y = flatten(&self.traj.samples[0].state);
        let n = y.len();
        let mut y_new = vec![0.0; n];
        let mut err = vec![0.0; n];
        let mut dense = vec![0.0; n];
        let mut h = opts.dt_init;
        let mut steps: u64 = 0;

        self.check_positivity(t, &y);
        if t >= t_end {
            return self.traj;
        }

        loop {
            if steps >= opts.max_steps {
                self.finish(RunStatus::StepCollapse, t, h, None);
                break;
            }
            steps += 1;
            let clipped = t + h >= t_end;
            let h_try = if clipped { t_end - t } else { h };
            self.stepper.attempt(&y, h_try, &mut y_new, &mut err);
            let finite = y_new.iter().all(|v| v.is_finite());
            let e = if finite {
                error_norm(&err, &y, &y_new, opts.rtol, opts.atol)
            } else {
                f64::INFINITY
            };

            if e > 1.0 {
                self.traj.rejected_steps += 1;
                let factor = if finite {
                    libm::fmin(1.0, libm::fmax(MIN_FACTOR, SAFETY * libm::pow(e, -0.2)))
                } else {
                    MIN_FACTOR
                };
                let h_next = h_try * factor;
                if h_next < opts.dt_min {
                    let status = if finite {
                        RunStatus::BlowupSuspected
                    } else {
                        RunStatus::Overflow
                    };
                    self.finish(status, t, h_try, Some(e));
                    break;
                }
                h = h_next;
                continue;
            }

            // accepted
            self.traj.accepted_steps += 1;
            let t_new = if clipped { t_end } else { t + h_try };
            while self.next_sample_due(t_new) {
                let ts = self.sample_time(self.next_sample);
                self.next_sample += 1;
                if ts >= t_new {
                    // lands on the step end up to rounding
                    self.push_sample(ts, h_try, &y_new);
                } else {
                    let sigma = (ts - t) / h_try;
                    self.stepper.dense(&y, h_try, sigma, &mut dense);
                    self.push_sample(ts, h_try, &dense);
                }
            }
            self.stepper.accept();
            core::mem::swap(&mut y, &mut y_new);
            t = t_new;

            self.check_positivity(t, &y);
            self.check_energy(t, &y);

            let peak = y.iter().fold(0.0f64, |m, v| libm::fmax(m, libm::fabs(*v)));
            if peak > opts.overflow_guard {
                self.push_sample(t, h_try, &y);
                self.finish(RunStatus::BlowupSuspected, t, 0.0, Some(peak));
                break;
            }
            if t >= t_end {
                self.push_sample(t, h_try, &y);
                break;
            }

            let factor = if e == 0.0 {
                MAX_FACTOR
            } else {
                libm::fmin(MAX_FACTOR, libm::fmax(MIN_FACTOR, SAFETY * libm::pow(e, -0.2)))
            };
            // a clipped final step says nothing about the natural step size
            if !clipped {
                h = libm::fmin(h_try * factor, opts.dt_max);
            }
        }
        if self.traj.status != RunStatus::Completed {
            let last_dt = self.traj.samples.last().map_or(0.0, |s| s.dt);
            self.push_sample(t, last_dt, &y);
        }
        self.traj
    }

    /// Whether the next grid sample falls inside the step ending at `t_new`.
    /// Samples within a relative `1e-12` of the step end are taken from it.
    fn next_sample_due(&self, t_new: f64) -> bool {
        let ts = self.sample_time(self.next_sample);
        ts <= self.opts.t_end && ts <= t_new + 1e-12 * libm::fmax(1.0, libm::fabs(t_new))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::GalerkinModel;
    use crate::params::{make_params, Exponent};
    use alloc::vec;

    fn params(nu: f64, mu: f64, k: usize) -> ModelParams {
        make_params(2.0, Exponent::Theta(1.0), nu, mu, 1.0, k, None).unwrap()
    }

    /// A system with diffusion only.
    struct Linear(Vec<f64>, Vec<f64>);
    impl ShellSystem for Linear {
        fn shells(&self) -> usize {
            self.0.len()
        }
        fn damping_a(&self) -> &[f64] {
            &self.0
        }
        fn damping_b(&self) -> &[f64] {
            &self.1
        }
        fn nonlinear(&self, _: &[f64], _: &[f64], da: &mut [f64], db: &mut [f64]) {
            da.fill(0.0);
            db.fill(0.0);
        }
        fn is_forced(&self) -> bool {
            false
        }
    }

    #[test]
    fn defaults_validate() {
        IntegratorOptions::default().validate().unwrap();
        let bad = IntegratorOptions {
            dt_min: 1.0,
            dt_init: 0.1,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = IntegratorOptions {
            rtol: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn pure_diffusion_step_is_exact() {
        let p = params(0.3, 0.7, 6);
        let sys = Linear(
            (1..=6).map(|j| p.nu * p.wavenumber(j) * p.wavenumber(j)).collect(),
            (1..=6).map(|j| p.mu * p.wavenumber(j) * p.wavenumber(j)).collect(),
        );
        let s0 = ShellState::new(vec![1.0, -0.5, 0.25, 2.0, 1.0, 3.0], vec![0.5; 6]).unwrap();
        for &dt in &[1e-6, 1e-2, 0.5, 10.0] {
            let (s1, err) = step_system(&sys, &s0, dt, &IntegratorOptions::default()).unwrap();
            assert_eq!(err, 0.0);
            for j in 0..6 {
                let ea = s0.a[j] * libm::exp(-sys.0[j] * dt);
                let eb = s0.b[j] * libm::exp(-sys.1[j] * dt);
                assert_eq!(s1.a[j], ea);
                assert_eq!(s1.b[j], eb);
            }
        }
    }

    #[test]
    fn taylor_check_on_two_shell_fixture() {
        let p = params(0.0, 0.0, 2);
        let s0 = ShellState::new(vec![1.0, 1.0], vec![1.0, 1.0]).unwrap();
        let dt = 1e-6;
        let (s1, _) = step(&s0, dt, &p, &RhsSelector::Galerkin, &IntegratorOptions::default()).unwrap();
        let expect = [1.0, 1.0, 1.0 - 4.0 * dt, 1.0 + 4.0 * dt];
        let got = [s1.a[0], s1.a[1], s1.b[0], s1.b[1]];
        for i in 0..4 {
            assert!((got[i] - expect[i]).abs() < 100.0 * dt * dt, "{i}: {}", got[i]);
        }
    }

    #[test]
    fn zero_end_time_gives_single_sample() {
        let p = params(0.1, 0.1, 4);
        let s0 = ShellState::zeros(4);
        let opts = IntegratorOptions {
            t_end: 0.0,
            ..Default::default()
        };
        let tr = integrate(&s0, &p, &opts, &RhsSelector::Galerkin).unwrap();
        assert_eq!(tr.samples.len(), 1);
        assert_eq!(tr.status, RunStatus::Completed);
    }

    #[test]
    fn samples_on_grid_and_increasing() {
        let p = params(0.05, 0.05, 6);
        let s0 = ShellState::new(vec![1.0, 0.5, 0.25, 0.0, 0.0, 0.0], vec![0.5, 0.5, 0.1, 0.0, 0.0, 0.0])
            .unwrap();
        let opts = IntegratorOptions {
            t_end: 1.05,
            sample_dt: 0.1,
            ..Default::default()
        };
        let tr = integrate(&s0, &p, &opts, &RhsSelector::Galerkin).unwrap();
        assert_eq!(tr.status, RunStatus::Completed);
        // 0, 0.1, ..., 1.0 and the final 1.05
        assert_eq!(tr.samples.len(), 12);
        assert!(tr.samples.windows(2).all(|w| w[0].t < w[1].t));
        assert_eq!(tr.end(), 1.05);
        for (i, s) in tr.samples.iter().take(11).enumerate() {
            assert!((s.t - 0.1 * i as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn dense_output_matches_stepping_to_the_sample() {
        // sampling at 0.1 versus stepping with end times on that grid
        let p = params(0.02, 0.03, 8);
        let sys = GalerkinModel::new(&p).unwrap();
        let s0 = ShellState::new(vec![1.0, 0.6, 0.3, 0.1, 0.0, 0.0, 0.0, 0.0], vec![0.8, 0.4, 0.2, 0.1, 0.0, 0.0, 0.0, 0.0])
            .unwrap();
        let fine = IntegratorOptions {
            rtol: 1e-11,
            atol: 1e-14,
            t_end: 0.7,
            sample_dt: 0.1,
            ..Default::default()
        };
        let tr = integrate_system(&sys, &s0, &fine).unwrap();
        let direct = integrate_system(
            &sys,
            &s0,
            &IntegratorOptions {
                t_end: 0.3,
                ..fine.clone()
            },
        )
        .unwrap();
        let at = &tr.samples[3].state;
        let want = direct.last_state().unwrap();
        for j in 0..8 {
            assert!((at.a[j] - want.a[j]).abs() < 1e-8, "a{j}");
            assert!((at.b[j] - want.b[j]).abs() < 1e-8, "b{j}");
        }
    }

    #[test]
    fn zero_state_stays_zero() {
        let p = params(0.1, 0.1, 5);
        let tr = integrate(&ShellState::zeros(5), &p, &IntegratorOptions::default(), &RhsSelector::Galerkin)
            .unwrap();
        assert_eq!(tr.status, RunStatus::Completed);
        assert!(tr.samples.iter().all(|s| s.state.max_abs() == 0.0));
        assert!(tr.events.is_empty());
    }

    #[test]
    fn positivity_loss_is_reported_once() {
        // a lone b_1 pushes a_2 negative through -b_1^2
        let p = params(0.0, 0.0, 3);
        let s0 = ShellState::new(vec![0.0, 0.0, 0.0], vec![1.0, 0.0, 0.0]).unwrap();
        let opts = IntegratorOptions {
            t_end: 0.5,
            positivity_watch: true,
            ..Default::default()
        };
        let tr = integrate(&s0, &p, &opts, &RhsSelector::Galerkin).unwrap();
        let losses: Vec<_> = tr
            .events
            .iter()
            .filter(|e| e.kind == EventKind::PositivityLoss)
            .collect();
        assert_eq!(losses.len(), 1);
        assert_eq!(losses[0].shell, Some((Field::A, 2)));
    }

    #[test]
    fn step_budget_gives_step_collapse() {
        let p = params(0.1, 0.1, 4);
        let s0 = ShellState::new(vec![1.0; 4], vec![1.0; 4]).unwrap();
        let opts = IntegratorOptions {
            max_steps: 3,
            dt_init: 1e-6,
            ..Default::default()
        };
        let tr = integrate(&s0, &p, &opts, &RhsSelector::Galerkin).unwrap();
        assert_eq!(tr.status, RunStatus::StepCollapse);
        assert_eq!(tr.events.last().unwrap().kind, EventKind::StepCollapse);
        assert!(tr.events.iter().all(|e| e.t >= tr.start() && e.t <= tr.end()));
    }

    #[test]
    fn deterministic() {
        let p = params(0.01, 0.02, 8);
        let s0 = ShellState::new(vec![1.0, 0.5, 0.2, 0.1, 0.0, 0.0, 0.0, 0.0], vec![0.3; 8]).unwrap();
        let a = integrate(&s0, &p, &IntegratorOptions::default(), &RhsSelector::Galerkin).unwrap();
        let b = integrate(&s0, &p, &IntegratorOptions::default(), &RhsSelector::Galerkin).unwrap();
        assert_eq!(a, b);
    }
}
