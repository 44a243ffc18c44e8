use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("wavenumber ratio lambda must exceed 1, got {0}")]
    InvalidLambda(f64),
    #[error("truncation level must be at least 1")]
    InvalidShellCount,
    #[error("{name} must be non-negative, got {value}")]
    Negative { name: &'static str, value: f64 },
    #[error("{0} is not finite")]
    NonFiniteParameter(&'static str),
    #[error("inconsistent exponents: theta={theta} but (5-delta)/2={implied} for delta={delta}")]
    InconsistentExponent { theta: f64, delta: f64, implied: f64 },
    #[error("forcing has {got} entries, expected {expected}")]
    ForcingLength { expected: usize, got: usize },
    #[error("state has {got} shells, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("delta_b={delta_b} exceeds delta_u={delta_u}")]
    IntermittencyOrder { delta_u: f64, delta_b: f64 },
    #[error("theta must be positive, got {0}")]
    NonPositiveTheta(f64),
    #[error("gamma must be positive, got {0}")]
    InvalidGamma(f64),
    #[error("non-finite entry at index {0}")]
    NonFiniteEntry(usize),
    #[error("negative entry at shell {0}")]
    NegativeEntry(usize),
    #[error("trajectory needs at least {needed} samples, has {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("time {t} lies outside the trajectory span [{start}, {end}]")]
    OutsideSpan { t: f64, start: f64, end: f64 },
    #[error("interval start {t1} is after its end {t}")]
    ReversedInterval { t1: f64, t: f64 },
    #[error("Riccati comparison needs L0 > 0 and C > 0 (L0={l0}, C={c})")]
    RiccatiDomain { l0: f64, c: f64 },
    #[error("t={t} is at or beyond the comparison blow-up time {t_star}")]
    PastBlowup { t: f64, t_star: f64 },
    #[error("step from t={t} produced a non-finite state")]
    Overflow { t: f64 },
    #[error("invalid integrator options: {0}")]
    InvalidOptions(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;
