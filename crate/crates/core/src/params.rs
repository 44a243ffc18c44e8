//! Model parameters and their validation.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// The nonlinearity exponent, supplied either directly or through the
/// intermittency dimension `delta` with `theta = (5 - delta) / 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Exponent {
    Theta(f64),
    Delta(f64),
    Both { theta: f64, delta: f64 },
}

/// Where `delta` sits relative to the physical range `[0, 3]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Intermittency {
    /// `0 < delta < 3`.
    Physical,
    /// `delta == 0` or `delta == 3`.
    Boundary,
    /// `delta < 0` or `delta > 3`. Accepted: the blow-up regime needs `theta > 3`.
    Unphysical,
}

/// Relative tolerance used when checking a supplied `(theta, delta)` pair.
const EXPONENT_TOL: f64 = 1e-12;

/// Full parameter set of the Hall-MHD dyadic model.
///
/// Build through [`make_params`]; the fields are public so that experiments
/// can copy and adjust them, and [`ModelParams::validate`] re-checks the
/// invariants.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ModelParams {
    /// Wavenumber ratio, `lambda_j = lambda^j`.
    pub lambda: f64,
    pub theta: f64,
    /// Always `5 - 2 theta`.
    pub delta: f64,
    /// Viscosity.
    pub nu: f64,
    /// Resistivity.
    pub mu: f64,
    /// Hall coefficient.
    pub d_i: f64,
    /// Number of shells.
    pub k: usize,
    /// Constant forcing on the magnetic shells, length `k`.
    pub forcing_b: Vec<f64>,
}

/// Validates and assembles a [`ModelParams`].
///
/// `forcing` defaults to zero on every shell.
pub fn make_params(
    lambda: f64,
    exponent: Exponent,
    nu: f64,
    mu: f64,
    d_i: f64,
    k: usize,
    forcing: Option<Vec<f64>>,
) -> Result<ModelParams> {
    let (theta, delta) = match exponent {
        Exponent::Theta(theta) => (theta, 5.0 - 2.0 * theta),
        Exponent::Delta(delta) => ((5.0 - delta) / 2.0, delta),
        Exponent::Both { theta, delta } => {
            let implied = (5.0 - delta) / 2.0;
            let scale = libm::fmax(1.0, libm::fabs(theta));
            if !(libm::fabs(theta - implied) <= EXPONENT_TOL * scale) {
                return Err(Error::InconsistentExponent {
                    theta,
                    delta,
                    implied,
                });
            }
            (theta, delta)
        }
    };
    let forcing_b = forcing.unwrap_or_else(|| vec![0.0; k]);
    let params = ModelParams {
        lambda,
        theta,
        delta,
        nu,
        mu,
        d_i,
        k,
        forcing_b,
    };
    params.validate()?;
    Ok(params)
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("lambda", self.lambda),
            ("theta", self.theta),
            ("delta", self.delta),
            ("nu", self.nu),
            ("mu", self.mu),
            ("d_i", self.d_i),
        ] {
            if !v.is_finite() {
                return Err(Error::NonFiniteParameter(name));
            }
        }
        if !(self.lambda > 1.0) {
            return Err(Error::InvalidLambda(self.lambda));
        }
        if self.k < 1 {
            return Err(Error::InvalidShellCount);
        }
        for (name, value) in [("nu", self.nu), ("mu", self.mu), ("d_i", self.d_i)] {
            if value < 0.0 {
                return Err(Error::Negative { name, value });
            }
        }
        if self.forcing_b.len() != self.k {
            return Err(Error::ForcingLength {
                expected: self.k,
                got: self.forcing_b.len(),
            });
        }
        if self.forcing_b.iter().any(|f| !f.is_finite()) {
            return Err(Error::NonFiniteParameter("forcing_b"));
        }
        let implied = (5.0 - self.delta) / 2.0;
        if !(libm::fabs(self.theta - implied) <= EXPONENT_TOL * libm::fmax(1.0, libm::fabs(self.theta))) {
            return Err(Error::InconsistentExponent {
                theta: self.theta,
                delta: self.delta,
                implied,
            });
        }
        Ok(())
    }

    pub fn intermittency(&self) -> Intermittency {
        if self.delta == 0.0 || self.delta == 3.0 {
            Intermittency::Boundary
        } else if self.delta > 0.0 && self.delta < 3.0 {
            Intermittency::Physical
        } else {
            Intermittency::Unphysical
        }
    }

    /// `lambda_j = lambda^j`.
    pub fn wavenumber(&self, j: usize) -> f64 {
        libm::pow(self.lambda, j as f64)
    }

    pub fn is_forced(&self) -> bool {
        self.forcing_b.iter().any(|&f| f != 0.0)
    }

    /// Same parameters with the exponent replaced.
    pub fn with_theta(&self, theta: f64) -> Self {
        Self {
            theta,
            delta: 5.0 - 2.0 * theta,
            ..self.clone()
        }
    }

    /// Same parameters truncated (or extended with zero forcing) to `k` shells.
    pub fn with_shells(&self, k: usize) -> Self {
        let mut forcing_b = self.forcing_b.clone();
        forcing_b.resize(k, 0.0);
        Self {
            k,
            forcing_b,
            ..self.clone()
        }
    }
}
