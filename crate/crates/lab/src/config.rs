//! Run configuration: one strict JSON document per run.
//!
//! ```json
//! {
//!   "model": {"lambda": 2, "delta": 3, "nu": 0.1, "mu": 0.1, "d_i": 1, "k": 16},
//!   "data": {"generator": "geometric", "amplitude": 1, "decay": 1},
//!   "integrator": {"rtol": 1e-8, "t_end": 1, "sample_dt": 0.01},
//!   "blowup": {"gamma": 0.05},
//!   "output": {"directory": "out", "formats": ["csv", "json"]}
//! }
//! ```
//!
//! Only `model` is required. Unknown keys anywhere are rejected.

use std::path::PathBuf;

use dyadic_core::{make_params, Exponent, IntegratorOptions, ModelParams, RhsSelector, ShellState};
use serde::{Deserialize, Serialize};

use crate::data::DataSpec;
use crate::error::LabError;
use crate::sweep::SweepGrid;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelSection,
    #[serde(default)]
    pub data: DataSpec,
    #[serde(default)]
    pub integrator: IntegratorOptions,
    #[serde(default)]
    pub blowup: BlowupSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepGrid>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub lambda: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    pub nu: f64,
    pub mu: f64,
    #[serde(default = "default_d_i")]
    pub d_i: f64,
    pub k: usize,
    /// `"galerkin"` (default) or `{"general": {...}}`.
    #[serde(default)]
    pub coefficients: RhsSelector,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub forcing: Option<Vec<f64>>,
}

fn default_d_i() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlowupSection {
    pub gamma: f64,
}

impl Default for BlowupSection {
    fn default() -> Self {
        Self { gamma: 0.05 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub directory: PathBuf,
    pub formats: Vec<Format>,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            directory: PathBuf::from("out"),
            formats: vec![Format::Csv, Format::Json],
        }
    }
}

impl OutputSection {
    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }
}

/// Parses and validates a configuration.
///
/// Syntax errors carry the line, column and key path; semantic errors name
/// the violated invariant.
pub fn parse_config(text: &str) -> Result<RunConfig, LabError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        LabError::Config(format!(
            "at `{path}` (line {}, column {}): {inner}",
            inner.line(),
            inner.column()
        ))
    })?;
    cfg.validate()?;
    Ok(cfg)
}

impl RunConfig {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn exponent(&self) -> Result<Exponent, LabError> {
        match (self.model.theta, self.model.delta) {
            (Some(t), None) => Ok(Exponent::Theta(t)),
            (None, Some(d)) => Ok(Exponent::Delta(d)),
            (Some(_), Some(_)) => Err(LabError::Config(
                "model: give exactly one of theta and delta".into(),
            )),
            (None, None) => Err(LabError::Config("model: theta or delta is required".into())),
        }
    }

    pub fn params(&self) -> Result<ModelParams, LabError> {
        let m = &self.model;
        make_params(m.lambda, self.exponent()?, m.nu, m.mu, m.d_i, m.k, m.forcing.clone())
            .map_err(|e| LabError::Config(format!("model: {e}")))
    }

    pub fn selector(&self) -> RhsSelector {
        self.model.coefficients
    }

    pub fn initial_state(&self) -> Result<ShellState, LabError> {
        self.data.build(&self.params()?, self.blowup.gamma)
    }

    pub fn validate(&self) -> Result<(), LabError> {
        let params = self.params()?;
        self.selector()
            .build(&params)
            .map_err(|e| LabError::Config(format!("model.coefficients: {e}")))?;
        self.integrator
            .validate()
            .map_err(|e| LabError::Config(format!("integrator: {e}")))?;
        if !(self.blowup.gamma > 0.0 && self.blowup.gamma.is_finite()) {
            return Err(LabError::Config("blowup: gamma must be positive".into()));
        }
        self.data.build(&params, self.blowup.gamma)?;
        if let Some(grid) = &self.sweep {
            grid.validate()?;
        }
        Ok(())
    }
}
