//! Experiments, sweeps, configuration and file formats around `dyadic-core`.

pub mod config;
pub mod data;
pub mod error;
pub mod experiments;
pub mod sweep;
pub mod timeseries;

pub use config::{parse_config, RunConfig};
pub use data::DataSpec;
pub use error::LabError;
pub use experiments::{Criterion, ExperimentReport, Verdict};
pub use sweep::{sweep_run, SweepGrid, SweepPoint};
pub use timeseries::{read_timeseries, write_timeseries, DiagnosticsRow};
