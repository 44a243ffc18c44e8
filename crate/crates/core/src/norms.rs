//! Sobolev-type norms and distances on shell sequences.

use crate::error::{Error, Result};
use crate::sum::Neumaier;

fn check_finite(x: &[f64]) -> Result<()> {
    match x.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(Error::NonFiniteEntry(i)),
        None => Ok(()),
    }
}

/// `||x||_s^2 = sum_n lambda_n^{2s} x_n^2`, compensated.
pub fn hs_norm_sq(x: &[f64], s: f64, lambda: f64) -> Result<f64> {
    check_finite(x)?;
    Ok(weighted_square_sum(x, 2.0 * s, lambda))
}

/// `||x||_s`. `s = 0` is the Euclidean norm.
pub fn hs_norm(x: &[f64], s: f64, lambda: f64) -> Result<f64> {
    hs_norm_sq(x, s, lambda).map(libm::sqrt)
}

/// `sum_n lambda_n^p x_n^2` without the finiteness check.
pub(crate) fn weighted_square_sum(x: &[f64], p: f64, lambda: f64) -> f64 {
    let mut acc = Neumaier::default();
    for (n, &v) in x.iter().enumerate() {
        if v != 0.0 {
            acc.add(libm::pow(lambda, p * (n + 1) as f64) * v * v);
        }
    }
    acc.total()
}

/// `sum_n lambda_n^p x_n x_{n+1}`.
pub(crate) fn weighted_neighbor_sum(x: &[f64], p: f64, lambda: f64) -> f64 {
    let mut acc = Neumaier::default();
    for (n, w) in x.windows(2).enumerate() {
        acc.add(libm::pow(lambda, p * (n + 1) as f64) * w[0] * w[1]);
    }
    acc.total()
}

/// `sum_n lambda_n^p x_n^3`.
pub(crate) fn weighted_cube_sum(x: &[f64], p: f64, lambda: f64) -> f64 {
    let mut acc = Neumaier::default();
    for (n, &v) in x.iter().enumerate() {
        acc.add(libm::pow(lambda, p * (n + 1) as f64) * v * v * v);
    }
    acc.total()
}

/// Euclidean distance `|u - v|`, zero-padding the shorter sequence.
pub fn strong_distance(u: &[f64], v: &[f64]) -> Result<f64> {
    check_finite(u)?;
    check_finite(v)?;
    let n = u.len().max(v.len());
    let mut acc = Neumaier::default();
    for i in 0..n {
        let d = u.get(i).copied().unwrap_or(0.0) - v.get(i).copied().unwrap_or(0.0);
        acc.add(d * d);
    }
    Ok(libm::sqrt(acc.total()))
}

/// `d_w(u, v) = sum_n 2^{-n^2} |u_n - v_n| / (1 + |u_n - v_n|)`.
///
/// The shorter sequence is padded with zeros.
pub fn weak_distance(u: &[f64], v: &[f64]) -> Result<f64> {
    check_finite(u)?;
    check_finite(v)?;
    let n = u.len().max(v.len());
    let mut acc = Neumaier::default();
    for i in 0..n {
        let d = libm::fabs(u.get(i).copied().unwrap_or(0.0) - v.get(i).copied().unwrap_or(0.0));
        let m = (i + 1) as f64;
        acc.add(libm::exp2(-m * m) * d / (1.0 + d));
    }
    Ok(acc.total())
}
