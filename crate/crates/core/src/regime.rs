//! Well-posedness regimes and the wavenumber rescaling.

use crate::error::{Error, Result};
use crate::params::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Regime {
    GlobalStrong,
    LocalStrong,
    BlowupCandidate,
    /// No theorem covers this exponent.
    Unclassified,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct RegimeReport {
    pub regime: Regime,
    pub theta: f64,
    pub d_i: f64,
    /// Which result governs the classification.
    pub basis: &'static str,
}

/// Classifies `(theta, d_i)`. Depends on nothing else in `params`.
pub fn classify_regime(params: &ModelParams) -> RegimeReport {
    classify(params.theta, params.d_i)
}

pub fn classify(theta: f64, d_i: f64) -> RegimeReport {
    let (regime, basis) = if d_i > 0.0 {
        if theta <= 1.0 {
            (Regime::GlobalStrong, "Hall, theta <= 1: global strong solution")
        } else if theta < 2.0 {
            (Regime::LocalStrong, "Hall, theta < 2: local strong solution")
        } else if theta > 3.0 {
            (
                Regime::BlowupCandidate,
                "Hall, theta > 3: large positive data blow up",
            )
        } else {
            (Regime::Unclassified, "Hall, 2 <= theta <= 3: open gap")
        }
    } else if theta <= 2.0 {
        (Regime::GlobalStrong, "MHD, theta <= 2: global strong solution")
    } else if theta < 3.0 {
        (Regime::LocalStrong, "MHD, theta < 3: local strong solution")
    } else {
        (Regime::Unclassified, "MHD, theta >= 3: no result")
    };
    RegimeReport {
        regime,
        theta,
        d_i,
        basis,
    }
}

/// The generalised-diffusion form of the model: wavenumbers
/// `bar_lambda_j = lambda_j^theta`, dissipation exponent `2 alpha`,
/// `alpha = 1 / theta`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RescaledParams {
    pub lambda_bar: f64,
    pub alpha: f64,
    pub dissipation_exponent: f64,
    /// Blow-up side of the rescaled statement (`alpha < 1/3`, Hall term on).
    pub blowup_side: bool,
}

pub fn rescale_alpha(params: &ModelParams) -> Result<RescaledParams> {
    rescale(params.lambda, params.theta, params.d_i)
}

pub fn rescale(lambda: f64, theta: f64, d_i: f64) -> Result<RescaledParams> {
    if !(theta > 0.0) {
        return Err(Error::NonPositiveTheta(theta));
    }
    let alpha = 1.0 / theta;
    Ok(RescaledParams {
        lambda_bar: libm::pow(lambda, theta),
        alpha,
        dissipation_exponent: 2.0 * alpha,
        blowup_side: d_i > 0.0 && alpha < 1.0 / 3.0,
    })
}

impl RescaledParams {
    /// Inverse map back to `(lambda, theta)`.
    pub fn unscale(&self) -> (f64, f64) {
        (libm::pow(self.lambda_bar, self.alpha), 1.0 / self.alpha)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{make_params, Exponent};

    #[test]
    fn remark_thresholds() {
        assert_eq!(classify(1.0, 1.0).regime, Regime::GlobalStrong);
        assert_eq!(classify(1.5, 1.0).regime, Regime::LocalStrong);
        assert_eq!(classify(2.0, 1.0).regime, Regime::Unclassified);
        assert_eq!(classify(3.0, 1.0).regime, Regime::Unclassified);
        assert_eq!(classify(3.5, 1.0).regime, Regime::BlowupCandidate);
        assert_eq!(classify(2.0, 0.0).regime, Regime::GlobalStrong);
        assert_eq!(classify(2.5, 0.0).regime, Regime::LocalStrong);
        assert_eq!(classify(3.0, 0.0).regime, Regime::Unclassified);
    }

    #[test]
    fn classification_ignores_other_parameters() {
        let p = make_params(2.0, Exponent::Theta(1.5), 0.1, 0.2, 1.0, 8, None).unwrap();
        let q = make_params(7.0, Exponent::Theta(1.5), 3.0, 0.0, 1.0, 30, None).unwrap();
        assert_eq!(classify_regime(&p).regime, classify_regime(&q).regime);
    }

    #[test]
    fn rescaling_examples() {
        let r = rescale(2.0, 2.0, 1.0).unwrap();
        assert_eq!((r.lambda_bar, r.alpha), (4.0, 0.5));
        // bar_lambda_j^alpha recovers lambda_j
        for j in 1..6 {
            let lj = libm::pow(2.0, j as f64);
            assert!((libm::pow(libm::pow(r.lambda_bar, j as f64), r.alpha) - lj).abs() <= 1e-12 * lj);
        }
        let r = rescale(2.0, 1.0, 1.0).unwrap();
        assert_eq!((r.lambda_bar, r.alpha), (2.0, 1.0));
        let r = rescale(2.0, 3.5, 1.0).unwrap();
        assert!((r.alpha - 2.0 / 7.0).abs() < 1e-15);
        assert!(r.blowup_side);
        assert!(!rescale(2.0, 3.5, 0.0).unwrap().blowup_side);
        assert_eq!(rescale(2.0, 0.0, 1.0), Err(Error::NonPositiveTheta(0.0)));
    }

    #[test]
    fn rescaling_round_trip() {
        for &(lambda, theta) in &[(2.0, 1.0), (2.0, 2.0), (3.0, 1.7), (20.0, 3.5)] {
            let (l, t) = rescale(lambda, theta, 1.0).unwrap().unscale();
            assert!((l - lambda).abs() <= 1e-13 * lambda);
            assert!((t - theta).abs() <= 1e-14 * theta);
        }
    }
}
