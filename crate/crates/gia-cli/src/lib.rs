//! Library surface behind the `gia` binary: configuration, the trial
//! pipeline, and report emission. Exposed as a library so integration tests
//! drive the exact code the CLI runs.

pub mod config;
pub mod pipeline;

pub use config::{
    apply_overrides, parse_config_file, parse_mode, Ablation, AttackConfig, BoundsPolicy,
    DatasetSource, Overrides,
};
pub use pipeline::{
    aggregate_records, apply_plan, build_trial_plan, inspect_plan, run_attack, run_baseline,
    run_method, run_sweep, run_trial, run_trial_with_plan, Aggregate, Method, RunEnv, RunOutput,
    SweepAxis, TrialRecord,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}
