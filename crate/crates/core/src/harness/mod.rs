//! Experiment harness behind the `evade`, `bench` and `verify` commands.

pub mod config;
pub mod instance;
pub mod trial;
pub mod verify;

pub use config::{
    Algorithm, BudgetConfig, ClassifierConfig, ClassifierKind, CostConfig, ExperimentConfig,
    OutputConfig, SamplerConfig, SweepConfig,
};
pub use instance::{build_instance, reference_mac, stream_id, trial_rng, Instance, MacSource};
pub use trial::{
    run_bench, run_evade, run_trial, run_trials, write_records, BenchReport, SummaryRow,
    TrialOutput, TrialRecord,
};
pub use verify::{run_verify, Suite, SuiteReport, VerifyOptions, VerifyReport};
