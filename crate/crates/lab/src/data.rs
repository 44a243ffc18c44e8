//! Initial data generators.

use dyadic_core::blowup::e_gamma;
use dyadic_core::{ModelParams, ShellState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::LabError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "snake_case", deny_unknown_fields)]
pub enum DataSpec {
    Zero,
    /// `a_shell = b_shell = amplitude`, every other shell zero.
    SingleShell { shell: usize, amplitude: f64 },
    /// `a_j = b_j = amplitude * lambda_j^{-decay}`.
    Geometric { amplitude: f64, decay: f64 },
    /// Uniform `(0, 1]` entries times `lambda_j^{-decay}`, rescaled so that
    /// `||a||_gamma^2 + ||b||_gamma^2 = e_gamma`.
    RandomPositive {
        e_gamma: f64,
        decay: f64,
        seed: u64,
    },
    /// Given leading shells, zero-padded to `k`.
    Explicit { a: Vec<f64>, b: Vec<f64> },
}

impl Default for DataSpec {
    fn default() -> Self {
        DataSpec::Geometric {
            amplitude: 1.0,
            decay: 1.0,
        }
    }
}

impl DataSpec {
    /// The initial state for `params`; `gamma` is only read by `RandomPositive`.
    pub fn build(&self, params: &ModelParams, gamma: f64) -> Result<ShellState, LabError> {
        let k = params.k;
        let lam = params.lambda;
        let bad = |msg: &str| Err(LabError::Config(format!("data: {msg}")));
        let state = match self {
            DataSpec::Zero => ShellState::zeros(k),
            DataSpec::SingleShell { shell, amplitude } => {
                if *shell == 0 || *shell > k {
                    return bad(&format!("shell {shell} outside 1..={k}"));
                }
                let mut s = ShellState::zeros(k);
                s.a[shell - 1] = *amplitude;
                s.b[shell - 1] = *amplitude;
                s
            }
            DataSpec::Geometric { amplitude, decay } => {
                let a: Vec<f64> = (1..=k)
                    .map(|j| amplitude * lam.powf(-decay * j as f64))
                    .collect();
                ShellState::new(a.clone(), a)?
            }
            DataSpec::RandomPositive { e_gamma: target, decay, seed } => {
                if !(*target >= 0.0) {
                    return bad("e_gamma must be non-negative");
                }
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let mut draw = |j: usize| {
                    let u: f64 = 1.0 - rng.gen::<f64>();
                    u * lam.powf(-decay * j as f64)
                };
                let a: Vec<f64> = (1..=k).map(&mut draw).collect();
                let b: Vec<f64> = (1..=k).map(&mut draw).collect();
                let mut s = ShellState::new(a, b)?;
                let scale = (target / e_gamma(&s, gamma, lam)).sqrt();
                s.a.iter_mut().chain(s.b.iter_mut()).for_each(|x| *x *= scale);
                s
            }
            DataSpec::Explicit { a, b } => {
                if a.len() > k || b.len() > k {
                    return bad(&format!("explicit data longer than k={k}"));
                }
                let pad = |x: &Vec<f64>| {
                    let mut x = x.clone();
                    x.resize(k, 0.0);
                    x
                };
                ShellState::new(pad(a), pad(b))?
            }
        };
        if !state.is_finite() {
            return bad("generated state is not finite");
        }
        Ok(state)
    }
}
