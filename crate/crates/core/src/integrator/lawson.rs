//! Integrating-factor (Lawson) Dormand-Prince 5(4) step on a flat `[a; b]`
//! vector.
//!
//! With `u' = -D u + N(u)` and `E(tau) = exp(-D tau h)` the stages are
//! `U_i = E(c_i) u + h sum_j a_ij E(c_i - c_j) N(U_j)`. The diffusion is
//! therefore exact, and a stiff shell only ever sees decaying factors.

use alloc::vec;
use alloc::vec::Vec;

use super::phi::{phis, MAX_ORDER};
use super::tableau::{dense_polynomials, A, C, E, STAGES};
use crate::model::ShellSystem;

pub(crate) struct Lawson<'s, S: ShellSystem + ?Sized> {
    sys: &'s S,
    k: usize,
    rates: Vec<f64>,
    /// Distinct `c_i - c_j` (including 0) and the index of each pair.
    taus: Vec<f64>,
    tau_index: [[usize; STAGES]; STAGES],
    /// `factors[t * n + c] = exp(-rates[c] * taus[t] * h)` for `h = factor_h`.
    factors: Vec<f64>,
    factor_h: f64,
    stages: [Vec<f64>; STAGES],
    first_valid: bool,
    scratch: Vec<f64>,
    dense: [[f64; 4]; STAGES],
}

impl<'s, S: ShellSystem + ?Sized> Lawson<'s, S> {
    pub(crate) fn new(sys: &'s S) -> Self {
        let k = sys.shells();
        let n = 2 * k;
        let mut rates = Vec::with_capacity(n);
        rates.extend_from_slice(sys.damping_a());
        rates.extend_from_slice(sys.damping_b());

        let mut taus: Vec<f64> = Vec::new();
        let mut tau_index = [[0usize; STAGES]; STAGES];
        for i in 0..STAGES {
            for j in 0..=i {
                let tau = C[i] - C[j];
                let idx = match taus.iter().position(|&t| t == tau) {
                    Some(p) => p,
                    None => {
                        taus.push(tau);
                        taus.len() - 1
                    }
                };
                tau_index[i][j] = idx;
            }
        }
        let factors = vec![1.0; taus.len() * n];
        Self {
            sys,
            k,
            rates,
            taus,
            tau_index,
            factors,
            factor_h: 0.0,
            stages: core::array::from_fn(|_| vec![0.0; n]),
            first_valid: false,
            scratch: vec![0.0; n],
            dense: dense_polynomials(),
        }
    }

    fn n(&self) -> usize {
        2 * self.k
    }

    fn eval_nonlinear(sys: &S, k: usize, u: &[f64], out: &mut [f64]) {
        let (a, b) = u.split_at(k);
        let (da, db) = out.split_at_mut(k);
        sys.nonlinear(a, b, da, db);
    }

    fn refresh_factors(&mut self, h: f64) {
        if h == self.factor_h {
            return;
        }
        let n = self.n();
        for (t, &tau) in self.taus.iter().enumerate() {
            for c in 0..n {
                self.factors[t * n + c] = libm::exp(-self.rates[c] * tau * h);
            }
        }
        self.factor_h = h;
    }

    #[inline]
    fn factor(&self, i: usize, j: usize, c: usize) -> f64 {
        self.factors[self.tau_index[i][j] * self.n() + c]
    }

    /// One trial step of size `h` from `y`. Writes the candidate to `out` and
    /// the embedded error vector to `err`.
    pub(crate) fn attempt(&mut self, y: &[f64], h: f64, out: &mut [f64], err: &mut [f64]) {
        let n = self.n();
        let k = self.k;
        if !self.first_valid {
            Self::eval_nonlinear(self.sys, k, y, &mut self.stages[0]);
            self.first_valid = true;
        }
        self.refresh_factors(h);
        for i in 1..STAGES {
            for c in 0..n {
                let mut acc = self.factor(i, 0, c) * (y[c] + h * A[i][0] * self.stages[0][c]);
                for j in 1..i {
                    if A[i][j] != 0.0 {
                        acc += h * A[i][j] * self.factor(i, j, c) * self.stages[j][c];
                    }
                }
                self.scratch[c] = acc;
            }
            Self::eval_nonlinear(self.sys, k, &self.scratch, &mut self.stages[i]);
        }
        // the last stage is evaluated at the fifth-order solution
        out.copy_from_slice(&self.scratch);
        let last = STAGES - 1;
        for c in 0..n {
            let mut e = 0.0;
            for j in 0..STAGES {
                if E[j] != 0.0 {
                    e += E[j] * self.factor(last, j, c) * self.stages[j][c];
                }
            }
            err[c] = h * e;
        }
    }

    /// State at `t + sigma h` inside the step just attempted from `y`.
    ///
    /// Uses the quartic continuous extension of the nonlinear stages,
    /// integrated exactly against the diffusion through `phi` functions.
    pub(crate) fn dense(&self, y: &[f64], h: f64, sigma: f64, out: &mut [f64]) {
        let mut fact = [1.0; MAX_ORDER];
        let mut pow = [sigma; MAX_ORDER];
        for m in 1..MAX_ORDER {
            fact[m] = fact[m - 1] * (m + 1) as f64;
            pow[m] = pow[m - 1] * sigma;
        }
        for c in 0..self.n() {
            let z = -self.rates[c] * sigma * h;
            let ph = phis(z);
            let mut acc = libm::exp(z) * y[c];
            for m in 0..MAX_ORDER {
                let mut g = 0.0;
                for j in 0..STAGES {
                    g += self.dense[j][m] * self.stages[j][c];
                }
                acc += h * pow[m] * fact[m] * ph[m] * g;
            }
            out[c] = acc;
        }
    }

    /// Promote the last stage to the first after an accepted step.
    pub(crate) fn accept(&mut self) {
        self.stages.swap(0, STAGES - 1);
        self.first_valid = true;
    }
}

/// Weighted RMS norm of `err` with scale `atol + rtol * max(|y|, |y_new|)`.
pub(crate) fn error_norm(err: &[f64], y: &[f64], y_new: &[f64], rtol: f64, atol: f64) -> f64 {
    if err.is_empty() {
        return 0.0;
    }
    let mut acc = 0.0;
    for c in 0..err.len() {
        let scale = atol + rtol * libm::fmax(libm::fabs(y[c]), libm::fabs(y_new[c]));
        let r = err[c] / scale;
        acc += r * r;
    }
    let v = libm::sqrt(acc / err.len() as f64);
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}
