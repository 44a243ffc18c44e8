//! Right-hand sides of the truncated dyadic systems.
//!
//! Both models store shells `1..=k` and treat `a_0 = b_0 = a_{k+1} = b_{k+1} = 0`
//! as ghosts. For the Hall-MHD special case this is exactly the Galerkin
//! closure: interior rows carry every triad, the last row keeps only the flux
//! arriving from shell `k - 1`.
//!
//! Terms are accumulated left to right in the order the equations are written.
//! The general model groups its terms so that at the special coefficient point
//! every extra contribution is an exact zero, which makes the reduction
//! bit-for-bit.

use alloc::boxed::Box;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::state::{Derivative, ShellState};

/// A truncated shell system split into diagonal damping and the remainder.
///
/// The full right-hand side is `-damping * u + nonlinear(u)`; forcing belongs
/// to the nonlinear part.
pub trait ShellSystem {
    fn shells(&self) -> usize;
    /// `nu * lambda_j^2` for `j = 1..=k`.
    fn damping_a(&self) -> &[f64];
    /// `mu * lambda_j^2` for `j = 1..=k`.
    fn damping_b(&self) -> &[f64];
    fn nonlinear(&self, a: &[f64], b: &[f64], da: &mut [f64], db: &mut [f64]);
    fn is_forced(&self) -> bool;

    /// Full right-hand side.
    fn rhs(&self, a: &[f64], b: &[f64], da: &mut [f64], db: &mut [f64]) {
        self.nonlinear(a, b, da, db);
        for (j, d) in da.iter_mut().enumerate() {
            *d -= self.damping_a()[j] * a[j];
        }
        for (j, d) in db.iter_mut().enumerate() {
            *d -= self.damping_b()[j] * b[j];
        }
    }
}

/// Shell `j` (1-based) with zero ghosts outside `1..=len`.
#[inline(always)]
fn shell(x: &[f64], j: usize) -> f64 {
    if j == 0 || j > x.len() {
        0.0
    } else {
        x[j - 1]
    }
}

/// `lambda^(j * exponent)` for `j = 0..=k+1`.
fn power_table(lambda: f64, exponent: f64, k: usize) -> Vec<f64> {
    (0..=k + 1)
        .map(|j| libm::pow(lambda, j as f64 * exponent))
        .collect()
}

fn damping_table(lambda: f64, coeff: f64, k: usize) -> Vec<f64> {
    (1..=k)
        .map(|j| coeff * libm::pow(lambda, 2.0 * j as f64))
        .collect()
}

/// The Hall-MHD dyadic model with forward cascade, truncated at `k` shells.
#[derive(Debug, Clone)]
pub struct GalerkinModel {
    k: usize,
    nu: f64,
    mu: f64,
    d_i: f64,
    lam2: Vec<f64>,
    pow_theta: Vec<f64>,
    pow_hall: Vec<f64>,
    damp_a: Vec<f64>,
    damp_b: Vec<f64>,
    forcing: Vec<f64>,
}

impl GalerkinModel {
    pub fn new(params: &ModelParams) -> Result<Self> {
        params.validate()?;
        let k = params.k;
        Ok(Self {
            k,
            nu: params.nu,
            mu: params.mu,
            d_i: params.d_i,
            lam2: damping_table(params.lambda, 1.0, k),
            pow_theta: power_table(params.lambda, params.theta, k),
            pow_hall: power_table(params.lambda, params.theta + 1.0, k),
            damp_a: damping_table(params.lambda, params.nu, k),
            damp_b: damping_table(params.lambda, params.mu, k),
            forcing: params.forcing_b.clone(),
        })
    }

    fn eval(&self, a: &[f64], b: &[f64], da: &mut [f64], db: &mut [f64], linear: bool) {
        let w = &self.pow_theta;
        let h = &self.pow_hall;
        for j in 1..=self.k {
            let (am, aj, ap) = (shell(a, j - 1), shell(a, j), shell(a, j + 1));
            let (bm, bj, bp) = (shell(b, j - 1), shell(b, j), shell(b, j + 1));

            let mut x = if linear { -self.nu * self.lam2[j - 1] * aj } else { 0.0 };
            x -= w[j] * aj * ap;
            x += w[j - 1] * am * am;
            x += w[j] * bj * bp;
            x -= w[j - 1] * bm * bm;
            da[j - 1] = x;

            let mut y = if linear { -self.mu * self.lam2[j - 1] * bj } else { 0.0 };
            y -= w[j] * aj * bp;
            y += w[j] * bj * ap;
            y -= self.d_i * (h[j] * bj * bp - h[j - 1] * bm * bm);
            y += self.forcing[j - 1];
            db[j - 1] = y;
        }
    }
}

impl ShellSystem for GalerkinModel {
    fn shells(&self) -> usize {
        self.k
    }
    fn damping_a(&self) -> &[f64] {
        &self.damp_a
    }
    fn damping_b(&self) -> &[f64] {
        &self.damp_b
    }
    fn nonlinear(&self, a: &[f64], b: &[f64], da: &mut [f64], db: &mut [f64]) {
        self.eval(a, b, da, db, false);
    }
    fn is_forced(&self) -> bool {
        self.forcing.iter().any(|&f| f != 0.0)
    }
    fn rhs(&self, a: &[f64], b: &[f64], da: &mut [f64], db: &mut [f64]) {
        self.eval(a, b, da, db, true);
    }
}

/// Reading of the backward magnetic coupling (`beta_3`) in the induction
/// equation, whose printed form pairs `a_{j-1}` with `b_j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Beta3Coupling {
    /// `lambda_j a_{j-1} b_j`, as printed. Conserves total energy.
    #[default]
    AsPrinted,
    /// `lambda_j a_{j+1} b_j`. Does not conserve energy; kept for comparison.
    ForwardNeighbor,
}

/// Coefficients of the general Hall-MHD shell model.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GeneralCoefficients {
    /// Forward-cascade weights `alpha_1..alpha_4`.
    pub alpha: [f64; 4],
    /// Backward-cascade weights `beta_1..beta_4`.
    pub beta: [f64; 4],
    pub zeta: f64,
    /// Intermittency dimension of the velocity; sets the velocity triads.
    pub delta_u: f64,
    /// Intermittency dimension of the magnetic field; sets coupling and Hall triads.
    pub delta_b: f64,
    #[cfg_attr(feature = "serde", serde(default))]
    pub beta3: Beta3Coupling,
}

impl GeneralCoefficients {
    /// The forward-cascade point `alpha = 1, beta = 0, zeta = 0, delta_u = delta_b`.
    pub fn forward(delta: f64) -> Self {
        Self {
            alpha: [1.0; 4],
            beta: [0.0; 4],
            zeta: 0.0,
            delta_u: delta,
            delta_b: delta,
            beta3: Beta3Coupling::AsPrinted,
        }
    }

    /// Obukhov-type backward cascade: `alpha = 0, beta = 1`.
    pub fn backward(delta: f64) -> Self {
        Self {
            alpha: [0.0; 4],
            beta: [1.0; 4],
            ..Self::forward(delta)
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("alpha", &self.alpha), ("beta", &self.beta)] {
            for &x in v.iter() {
                if !x.is_finite() {
                    return Err(Error::NonFiniteParameter(name));
                }
                if x < 0.0 {
                    return Err(Error::Negative { name, value: x });
                }
            }
        }
        for (name, v) in [("zeta", self.zeta), ("delta_u", self.delta_u), ("delta_b", self.delta_b)] {
            if !v.is_finite() {
                return Err(Error::NonFiniteParameter(name));
            }
        }
        if self.delta_b > self.delta_u {
            return Err(Error::IntermittencyOrder {
                delta_u: self.delta_u,
                delta_b: self.delta_b,
            });
        }
        Ok(())
    }

    pub fn theta_u(&self) -> f64 {
        (5.0 - self.delta_u) / 2.0
    }

    pub fn theta_b(&self) -> f64 {
        (5.0 - self.delta_b) / 2.0
    }
}

/// The general model. `params.theta` is ignored: exponents come from
/// `delta_u` and `delta_b`.
#[derive(Debug, Clone)]
pub struct GeneralModel {
    k: usize,
    nu: f64,
    mu: f64,
    d_i: f64,
    c: GeneralCoefficients,
    lam2: Vec<f64>,
    pow_u: Vec<f64>,
    pow_b: Vec<f64>,
    pow_hall: Vec<f64>,
    damp_a: Vec<f64>,
    damp_b: Vec<f64>,
    forcing: Vec<f64>,
}

impl GeneralModel {
    pub fn new(params: &ModelParams, coeffs: &GeneralCoefficients) -> Result<Self> {
        params.validate()?;
        coeffs.validate()?;
        let k = params.k;
        let lambda = params.lambda;
        Ok(Self {
            k,
            nu: params.nu,
            mu: params.mu,
            d_i: params.d_i,
            c: *coeffs,
            lam2: damping_table(lambda, 1.0, k),
            pow_u: power_table(lambda, coeffs.theta_u(), k),
            pow_b: power_table(lambda, coeffs.theta_b(), k),
            pow_hall: power_table(lambda, coeffs.theta_b() + 1.0, k),
            damp_a: damping_table(lambda, params.nu, k),
            damp_b: damping_table(lambda, params.mu, k),
            forcing: params.forcing_b.clone(),
        })
    }

    fn eval(&self, a: &[f64], b: &[f64], da: &mut [f64], db: &mut [f64], linear: bool) {
        let [a1, a2, a3, a4] = self.c.alpha;
        let [b1, b2, b3, b4] = self.c.beta;
        let zeta = self.c.zeta;
        let (u, m, h) = (&self.pow_u, &self.pow_b, &self.pow_hall);
        for j in 1..=self.k {
            let (am, aj, ap) = (shell(a, j - 1), shell(a, j), shell(a, j + 1));
            let (bm, bj, bp) = (shell(b, j - 1), shell(b, j), shell(b, j + 1));

            let mut x = if linear { -self.nu * self.lam2[j - 1] * aj } else { 0.0 };
            x -= a1 * (u[j] * aj * ap);
            x += a1 * (u[j - 1] * am * am);
            x += a3 * (m[j] * bj * bp);
            x -= a3 * (m[j - 1] * bm * bm);
            x -= b1 * (u[j] * ap * ap - u[j - 1] * am * aj);
            x += b3 * (m[j + 1] * bp * bp - m[j] * bm * bj);
            x -= zeta * (m[j] * bj * (bm + bj + bp));
            da[j - 1] = x;

            let mut y = if linear { -self.mu * self.lam2[j - 1] * bj } else { 0.0 };
            y -= a2 * (m[j] * aj * bp);
            y += a3 * (m[j] * bj * ap);
            // -alpha_2 and +alpha_3 both carry lambda_{j-1} a_{j-1} b_{j-1}
            y += (a2 - a3) * (m[j - 1] * am * bm);
            y -= self.d_i * a4 * (h[j] * bj * bp - h[j - 1] * bm * bm);
            y -= b2 * (m[j + 1] * ap * bp - m[j] * aj * bm);
            let partner = match self.c.beta3 {
                Beta3Coupling::AsPrinted => am,
                Beta3Coupling::ForwardNeighbor => ap,
            };
            y += b3 * (m[j + 1] * bp * ap - m[j] * partner * bj);
            y += zeta * (m[j] * aj * (bm + bj + bp));
            y -= self.d_i * b4 * (h[j] * bp * bp - h[j - 1] * bj * bm);
            y += self.forcing[j - 1];
            db[j - 1] = y;
        }
    }
}

impl ShellSystem for GeneralModel {
    fn shells(&self) -> usize {
        self.k
    }
    fn damping_a(&self) -> &[f64] {
        &self.damp_a
    }
    fn damping_b(&self) -> &[f64] {
        &self.damp_b
    }
    fn nonlinear(&self, a: &[f64], b: &[f64], da: &mut [f64], db: &mut [f64]) {
        self.eval(a, b, da, db, false);
    }
    fn is_forced(&self) -> bool {
        self.forcing.iter().any(|&f| f != 0.0)
    }
    fn rhs(&self, a: &[f64], b: &[f64], da: &mut [f64], db: &mut [f64]) {
        self.eval(a, b, da, db, true);
    }
}

/// Which right-hand side to integrate.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum RhsSelector {
    #[default]
    Galerkin,
    General(GeneralCoefficients),
}

impl RhsSelector {
    pub fn build(&self, params: &ModelParams) -> Result<Box<dyn ShellSystem + Send + Sync>> {
        Ok(match self {
            RhsSelector::Galerkin => Box::new(GalerkinModel::new(params)?),
            RhsSelector::General(c) => Box::new(GeneralModel::new(params, c)?),
        })
    }
}

fn evaluate(system: &dyn ShellSystem, state: &ShellState) -> Result<Derivative> {
    state.check_len(system.shells())?;
    let mut d = Derivative::zeros(system.shells());
    system.rhs(&state.a, &state.b, &mut d.da, &mut d.db);
    Ok(d)
}

/// Right-hand side of the Galerkin-truncated Hall-MHD dyadic model.
pub fn rhs_galerkin(state: &ShellState, params: &ModelParams) -> Result<Derivative> {
    evaluate(&GalerkinModel::new(params)?, state)
}

/// Right-hand side of the general shell model, truncated with zero ghosts.
pub fn rhs_general(
    state: &ShellState,
    params: &ModelParams,
    coeffs: &GeneralCoefficients,
) -> Result<Derivative> {
    evaluate(&GeneralModel::new(params, coeffs)?, state)
}

/// Sum of the magnitudes of every term in `sum_j a_j da_j + b_j db_j` for
/// the Galerkin nonlinearity. The flux sum cancels to zero; its rounding
/// error is relative to this scale.
pub fn flux_scale(state: &ShellState, params: &ModelParams) -> Result<f64> {
    let m = GalerkinModel::new(params)?;
    state.check_len(m.k)?;
    let (a, b) = (&state.a, &state.b);
    let (w, h) = (&m.pow_theta, &m.pow_hall);
    let mut acc = crate::sum::Neumaier::default();
    for j in 1..=m.k {
        let (am, aj, ap) = (shell(a, j - 1).abs(), shell(a, j).abs(), shell(a, j + 1).abs());
        let (bm, bj, bp) = (shell(b, j - 1).abs(), shell(b, j).abs(), shell(b, j + 1).abs());
        acc.add(aj * (w[j] * aj * ap + w[j - 1] * am * am + w[j] * bj * bp + w[j - 1] * bm * bm));
        acc.add(bj * (w[j] * aj * bp + w[j] * bj * ap + m.d_i * (h[j] * bj * bp + h[j - 1] * bm * bm)));
    }
    Ok(acc.total())
}
