//! Lyapunov blow-up certificate for positive solutions with `theta > 3`.
//!
//! The Lyapunov function is
//!
//! ```text
//! L = ||a||_g^2 + ||b||_g^2 + c1 sum lambda_j^{2g} a_j a_{j+1} + c2 sum lambda_j^{2g} b_j b_{j+1}
//! ```
//!
//! and along positive solutions it obeys `dL/dt >= C L^{3/2}` once the initial
//! `E_g = ||a||_g^2 + ||b||_g^2` exceeds `M0^2`. The constants are fixed by
//! choosing the Young parameter `eps = 2 lambda^{-2/3}`, `c2 = 1.8 c1` with
//! `c2 = 16/17 (lambda^{2g} - 1) lambda^{1/3 + 2g/eps - (2g + theta)/3}` and `c3`
//! the smaller of the two cubic-coefficient combinations. The four coefficient
//! conditions are evaluated literally; they are known to hold for
//! `lambda >= 20` and are simply reported for smaller ratios.
//!
//! Certificates assume `d_i = 1`; other Hall coefficients need a rescaled
//! `lambda` that callers must supply themselves.

use crate::error::{Error, Result};
use crate::norms::{weighted_cube_sum, weighted_neighbor_sum, weighted_square_sum};
use crate::state::ShellState;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum CertificateStatus {
    Valid,
    /// `theta <= 3 + gamma`: `c0` is undefined.
    ExponentTooSmall,
    /// At least one coefficient condition fails.
    ConditionsFail,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BlowupConstants {
    pub lambda: f64,
    pub gamma: f64,
    pub theta: f64,
    pub nu: f64,
    pub mu: f64,
    pub epsilon: f64,
    /// `(lambda^{2(theta - gamma - 3)} - 1)^{1/2}`; NaN when `theta <= 3 + gamma`.
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    /// Left-hand sides of the four coefficient conditions.
    pub lhs: [f64; 4],
    pub cond11: bool,
    pub cond12: bool,
    pub cond13: bool,
    pub cond14: bool,
    pub m1: f64,
    pub m0: f64,
    /// `1 + (c1 + c2) lambda^{-gamma-1}`.
    pub sandwich: f64,
    /// `c0 c3 / 4 * sandwich^{-3/2}`.
    pub riccati_c: f64,
    pub status: CertificateStatus,
}

impl BlowupConstants {
    pub fn is_valid(&self) -> bool {
        self.status == CertificateStatus::Valid
    }

    pub fn conditions(&self) -> [bool; 4] {
        [self.cond11, self.cond12, self.cond13, self.cond14]
    }

    /// Comparison blow-up time `2 / (C sqrt(L0))`.
    pub fn riccati_time(&self, l0: f64) -> f64 {
        riccati_blowup_time(l0, self.riccati_c)
    }
}

/// Evaluates every certificate constant and condition.
///
/// Fails only for `gamma <= 0`, `lambda <= 1` or non-finite input; an
/// exponent `theta <= 3 + gamma` yields a certificate with status
/// [`CertificateStatus::ExponentTooSmall`].
pub fn blowup_constants(gamma: f64, lambda: f64, theta: f64, nu: f64, mu: f64) -> Result<BlowupConstants> {
    for (name, v) in [("gamma", gamma), ("lambda", lambda), ("theta", theta), ("nu", nu), ("mu", mu)] {
        if !v.is_finite() {
            return Err(Error::NonFiniteParameter(name));
        }
    }
    if !(gamma > 0.0) {
        return Err(Error::InvalidGamma(gamma));
    }
    if !(lambda > 1.0) {
        return Err(Error::InvalidLambda(lambda));
    }
    let pw = |e: f64| libm::pow(lambda, e);
    let g = gamma;
    let eps = 2.0 * pw(-2.0 / 3.0);
    let growth = pw(2.0 * g) - 1.0;

    let c2 = 16.0 / 17.0 * growth * pw(1.0 / 3.0 + 2.0 * g / eps - (2.0 * g + theta) / 3.0);
    let c1 = c2 / 1.8;

    let lhs11 = c1
        * (eps
            - 0.5 * pw(-(2.0 * g + theta) / 2.0)
            - pw(2.0 / 3.0 * (g - theta)) / 3.0
            - pw(-2.0 / 3.0) / 3.0)
        - c2 / 3.0 * (pw(-2.0 / 3.0 * (2.0 * g + theta + 2.0)) + pw(-2.0 * g - 4.0 / 3.0))
        - 2.0 / 3.0 * growth * pw(-(2.0 * g + theta + 2.0) / 3.0);
    let lhs12 = c2
        * (eps
            - 2.0 / 3.0 * pw(-2.0 / 3.0 * (2.0 * g + theta + 2.0))
            - 2.0 / 3.0 * pw(-2.0 * g - 4.0 / 3.0)
            - 0.5 * pw(-(2.0 * g + theta + 1.0) / 2.0))
        - 2.0 / 3.0 * c1 * (pw(2.0 / 3.0 * (g - theta)) + pw(-2.0 / 3.0))
        - 4.0 / 3.0 * growth * pw(-(2.0 * g + theta + 2.0) / 3.0);
    let lhs13 = 2.0 * growth
        - c1 * (eps * pw(-2.0 * g / eps + (2.0 * g + theta) / 3.0) + 0.5 * pw(-(2.0 * g + theta) / 2.0));
    let lhs14 = 2.0 * growth
        - c2 * (eps * pw(-2.0 * g / eps + (2.0 * g + theta + 1.0) / 3.0)
            + 0.5 * pw(-(2.0 * g + theta + 1.0) / 2.0));

    let c3 = libm::fmin(lhs11, lhs12);
    let cond11 = lhs11 > 0.0;
    let cond12 = lhs12 > 0.0;
    let cond13 = lhs13 >= 0.0;
    let cond14 = lhs14 >= 0.0;

    let exponent_ok = theta > 3.0 + gamma;
    let c0 = if exponent_ok {
        libm::sqrt(pw(2.0 * (theta - gamma - 3.0)) - 1.0)
    } else {
        f64::NAN
    };
    let decay = pw(-gamma - 1.0);
    let sandwich = 1.0 + (c1 + c2) * decay;
    let m1 = 2.0 * (nu + mu) + (c1 * nu + c2 * mu) * (1.0 + lambda * lambda) * decay;
    let m0 = 4.0 * m1 / (c0 * c3) * libm::sqrt(sandwich);
    let riccati_c = 0.25 * c0 * c3 * libm::pow(sandwich, -1.5);

    let status = if !exponent_ok {
        CertificateStatus::ExponentTooSmall
    } else if cond11 && cond12 && cond13 && cond14 {
        CertificateStatus::Valid
    } else {
        CertificateStatus::ConditionsFail
    };

    Ok(BlowupConstants {
        lambda,
        gamma,
        theta,
        nu,
        mu,
        epsilon: eps,
        c0,
        c1,
        c2,
        c3,
        lhs: [lhs11, lhs12, lhs13, lhs14],
        cond11,
        cond12,
        cond13,
        cond14,
        m1,
        m0,
        sandwich,
        riccati_c,
        status,
    })
}

/// `E_g = ||a||_g^2 + ||b||_g^2`.
pub fn e_gamma(state: &ShellState, gamma: f64, lambda: f64) -> f64 {
    weighted_square_sum(&state.a, 2.0 * gamma, lambda) + weighted_square_sum(&state.b, 2.0 * gamma, lambda)
}

/// Pieces of the Lyapunov function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LyapunovParts {
    pub value: f64,
    pub e_gamma: f64,
    /// `sum lambda_j^{2g} a_j a_{j+1}`, unweighted by `c1`.
    pub cross_a: f64,
    pub cross_b: f64,
    /// The lower sandwich bound and the Riccati argument need this.
    pub nonnegative: bool,
}

pub fn lyapunov_parts(state: &ShellState, consts: &BlowupConstants) -> LyapunovParts {
    let (g, lambda) = (consts.gamma, consts.lambda);
    let e = e_gamma(state, g, lambda);
    let cross_a = weighted_neighbor_sum(&state.a, 2.0 * g, lambda);
    let cross_b = weighted_neighbor_sum(&state.b, 2.0 * g, lambda);
    LyapunovParts {
        value: e + consts.c1 * cross_a + consts.c2 * cross_b,
        e_gamma: e,
        cross_a,
        cross_b,
        nonnegative: state.a.iter().chain(&state.b).all(|&x| x >= 0.0),
    }
}

/// Value of the Lyapunov function. Only `gamma`, `lambda`, `c1`, `c2` are used,
/// so it is defined even for an invalid certificate.
pub fn lyapunov_value(state: &ShellState, consts: &BlowupConstants) -> f64 {
    lyapunov_parts(state, consts).value
}

/// Sandwich `E_g <= L <= sandwich * E_g` as stated alongside the certificate.
/// Returns `(lower, upper)`.
pub fn sandwich_bounds(state: &ShellState, consts: &BlowupConstants) -> (f64, f64) {
    let e = e_gamma(state, consts.gamma, consts.lambda);
    (e, consts.sandwich * e)
}

/// Cauchy-Schwarz upper bound
/// `L <= E_g + lambda^{-g} (c1 ||a||_g^2 + c2 ||b||_g^2)` for nonnegative states.
///
/// Neighbour products shift one shell, so the sharp factor is
/// `lambda^{-gamma}`, one power of `lambda` weaker than `sandwich`.
pub fn sharp_upper_bound(state: &ShellState, consts: &BlowupConstants) -> f64 {
    let (g, lambda) = (consts.gamma, consts.lambda);
    let ea = weighted_square_sum(&state.a, 2.0 * g, lambda);
    let eb = weighted_square_sum(&state.b, 2.0 * g, lambda);
    ea + eb + libm::pow(lambda, -g) * (consts.c1 * ea + consts.c2 * eb)
}

/// One inequality `lhs <= rhs` (or `lhs >= rhs`), evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Inequality {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

impl Inequality {
    // Relative slack for ties that only differ by rounding.
    const SLACK: f64 = 1e-12;

    fn at_least(lhs: f64, rhs: f64) -> Self {
        let tol = Self::SLACK * libm::fmax(libm::fabs(lhs), libm::fabs(rhs));
        Self { lhs, rhs, holds: lhs >= rhs - tol }
    }

    fn at_most(lhs: f64, rhs: f64) -> Self {
        let tol = Self::SLACK * libm::fmax(libm::fabs(lhs), libm::fabs(rhs));
        Self { lhs, rhs, holds: lhs <= rhs + tol }
    }

    /// `lhs - rhs` for lower bounds, `rhs - lhs` for upper bounds is left to the caller.
    pub fn gap(&self) -> f64 {
        self.lhs - self.rhs
    }
}

/// The cubic lower bounds (part i) and neighbour upper bounds (part ii).
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TripleReport {
    /// `sum lambda_j^{2g+theta} a_j^3 >= c0 ||a||_{g+1}^3`; `None` unless `theta > 3 + g`.
    pub cubic_a: Option<Inequality>,
    pub cubic_b: Option<Inequality>,
    /// `sum lambda_j^{2g+2} a_j a_{j+1} <= lambda^{-g-1} ||a||_{g+1}^2`.
    pub neighbor_a: Inequality,
    pub neighbor_b: Inequality,
}

impl TripleReport {
    pub fn all_hold(&self) -> bool {
        self.cubic_a.is_none_or(|i| i.holds)
            && self.cubic_b.is_none_or(|i| i.holds)
            && self.neighbor_a.holds
            && self.neighbor_b.holds
    }
}

/// Checks the auxiliary cubic and neighbour inequalities on a nonnegative state.
pub fn check_triple_bounds(state: &ShellState, gamma: f64, theta: f64, lambda: f64) -> Result<TripleReport> {
    if let Some(i) = state.a.iter().chain(&state.b).position(|&x| x < 0.0) {
        return Err(Error::NegativeEntry(i % state.len().max(1) + 1));
    }
    if !state.is_finite() {
        return Err(Error::NonFiniteEntry(0));
    }
    let cubic = if theta > 3.0 + gamma {
        let c0 = libm::sqrt(libm::pow(lambda, 2.0 * (theta - gamma - 3.0)) - 1.0);
        let part = |x: &[f64]| {
            let lhs = weighted_cube_sum(x, 2.0 * gamma + theta, lambda);
            let norm = libm::sqrt(weighted_square_sum(x, 2.0 * gamma + 2.0, lambda));
            Inequality::at_least(lhs, c0 * norm * norm * norm)
        };
        Some((part(&state.a), part(&state.b)))
    } else {
        None
    };
    let neighbor = |x: &[f64]| {
        let lhs = weighted_neighbor_sum(x, 2.0 * gamma + 2.0, lambda);
        let rhs = libm::pow(lambda, -gamma - 1.0) * weighted_square_sum(x, 2.0 * gamma + 2.0, lambda);
        Inequality::at_most(lhs, rhs)
    };
    Ok(TripleReport {
        cubic_a: cubic.map(|c| c.0),
        cubic_b: cubic.map(|c| c.1),
        neighbor_a: neighbor(&state.a),
        neighbor_b: neighbor(&state.b),
    })
}

/// `t* = 2 / (C sqrt(L0))`.
pub fn riccati_blowup_time(l0: f64, c: f64) -> f64 {
    2.0 / (c * libm::sqrt(l0))
}

/// Exact solution `L0 / (1 - (C/2) sqrt(L0) t)^2` of `L' = C L^{3/2}`.
pub fn riccati_lower_bound(l0: f64, c: f64, t: f64) -> Result<f64> {
    if !(l0 > 0.0 && c > 0.0) {
        return Err(Error::RiccatiDomain { l0, c });
    }
    let t_star = riccati_blowup_time(l0, c);
    if !(t < t_star) {
        return Err(Error::PastBlowup { t, t_star });
    }
    let d = 1.0 - 0.5 * c * libm::sqrt(l0) * t;
    Ok(l0 / (d * d))
}

/// The cubed norms whose local integrability fails at blow-up. The magnetic
/// index appears both as `(theta+1)/3 + 2g/3` and as `theta/3 + 2g/3`, so
/// both are reported.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlowupNorms {
    pub a_cubed: f64,
    pub b_cubed_hall: f64,
    pub b_cubed_plain: f64,
}

pub fn blowup_norms(state: &ShellState, gamma: f64, theta: f64, lambda: f64) -> BlowupNorms {
    let cube = |x: &[f64], s: f64| {
        let n = libm::sqrt(weighted_square_sum(x, 2.0 * s, lambda));
        n * n * n
    };
    let s_a = theta / 3.0 + 2.0 * gamma / 3.0;
    BlowupNorms {
        a_cubed: cube(&state.a, s_a),
        b_cubed_hall: cube(&state.b, (theta + 1.0) / 3.0 + 2.0 * gamma / 3.0),
        b_cubed_plain: cube(&state.b, s_a),
    }
}
