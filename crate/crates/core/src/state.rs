use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::sum::Neumaier;

/// Velocity and magnetic shell amplitudes at time `t`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ShellState {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub t: f64,
}

/// Time derivative of a [`ShellState`].
#[derive(Debug, Clone, PartialEq)]
pub struct Derivative {
    pub da: Vec<f64>,
    pub db: Vec<f64>,
}

impl ShellState {
    pub fn new(a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::LengthMismatch {
                expected: a.len(),
                got: b.len(),
            });
        }
        Ok(Self { a, b, t: 0.0 })
    }

    pub fn zeros(k: usize) -> Self {
        Self {
            a: vec![0.0; k],
            b: vec![0.0; k],
            t: 0.0,
        }
    }

    pub fn at_time(mut self, t: f64) -> Self {
        self.t = t;
        self
    }

    /// Number of shells.
    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.a.iter().chain(&self.b).all(|x| x.is_finite())
    }

    /// `|a|^2 + |b|^2`.
    pub fn energy(&self) -> f64 {
        let mut acc = Neumaier::default();
        for x in self.a.iter().chain(&self.b) {
            acc.add(x * x);
        }
        acc.total()
    }

    pub fn max_abs(&self) -> f64 {
        self.a
            .iter()
            .chain(&self.b)
            .fold(0.0, |m, x| libm::fmax(m, libm::fabs(*x)))
    }

    pub fn min_entry(&self) -> f64 {
        self.a
            .iter()
            .chain(&self.b)
            .fold(f64::INFINITY, |m, &x| libm::fmin(m, x))
    }

    /// Copy padded with zero shells (or truncated) to `k` shells.
    pub fn resized(&self, k: usize) -> Self {
        let mut out = self.clone();
        out.a.resize(k, 0.0);
        out.b.resize(k, 0.0);
        out
    }

    pub(crate) fn check_len(&self, k: usize) -> Result<()> {
        if self.a.len() != k {
            return Err(Error::LengthMismatch {
                expected: k,
                got: self.a.len(),
            });
        }
        if self.b.len() != k {
            return Err(Error::LengthMismatch {
                expected: k,
                got: self.b.len(),
            });
        }
        Ok(())
    }
}

impl Derivative {
    pub fn zeros(k: usize) -> Self {
        Self {
            da: vec![0.0; k],
            db: vec![0.0; k],
        }
    }

    /// `sum_j a_j da_j + b_j db_j`, i.e. half the rate of change of energy.
    pub fn energy_rate(&self, state: &ShellState) -> f64 {
        let mut acc = Neumaier::default();
        for (x, dx) in state.a.iter().zip(&self.da) {
            acc.add(x * dx);
        }
        for (x, dx) in state.b.iter().zip(&self.db) {
            acc.add(x * dx);
        }
        acc.total()
    }
}
