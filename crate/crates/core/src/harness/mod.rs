//! Experiment orchestration: TOML configs, ε-sweeps and verification suites.

mod config;
mod sweep;
mod verify;

pub use config::{
    CrackSpec, DirichletSpec, ExperimentConfig, Geometry, Mode, OutputConfig, ParamsConfig, Preset, RecoveryConfig,
    Schedule, Target, VerifyConfig, CONFIG_VERSION,
};
pub use sweep::{minimize_fields, recovery_fields, relative_gap, run_sweep, write_csv, RowFields, SweepRow, CSV_HEADER};
pub use verify::{run_verify, SuiteResult, VerifyReport, SUITES};

#[cfg(test)]
mod tests;
