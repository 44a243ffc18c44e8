//! Dyadic (shell) models of Hall magnetohydrodynamics parameterised by the
//! intermittency dimension.
//!
//! The crate is `no_std` + `alloc`. It evaluates the right-hand sides of the
//! truncated shell systems, computes the sequence-space norms and energy
//! budgets, assembles the Lyapunov blow-up certificate and advances states with
//! an integrating-factor Dormand-Prince 5(4) scheme.
//!
//! Shells are stored 1-based in the mathematical sense: `a[0]` holds `a_1`.
//! Ghost shells `a_0 = b_0 = 0` and `a_{k+1} = b_{k+1} = 0` are implicit.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod blowup;
pub mod budget;
pub mod error;
pub mod integrator;
pub mod model;
pub mod norms;
pub mod params;
pub mod regime;
pub mod state;
pub mod sum;

pub use blowup::{
    blowup_constants, check_triple_bounds, lyapunov_value, riccati_lower_bound, BlowupConstants,
    CertificateStatus, TripleReport,
};
pub use budget::{energy_budget, leray_hopf_check, EnergyBudget, LerayHopfReport};
pub use error::{Error, Result};
pub use integrator::{
    integrate, integrate_system, step, step_system, EventKind, EventRecord, IntegratorOptions, RunStatus, Sample, Trajectory,
};
pub use model::{
    flux_scale, rhs_galerkin, rhs_general, Beta3Coupling, GalerkinModel, GeneralCoefficients, GeneralModel,
    RhsSelector, ShellSystem,
};
pub use norms::{hs_norm, hs_norm_sq, strong_distance, weak_distance};
pub use params::{make_params, Exponent, Intermittency, ModelParams};
pub use regime::{classify_regime, rescale_alpha, Regime, RegimeReport, RescaledParams};
pub use state::{Derivative, ShellState};
