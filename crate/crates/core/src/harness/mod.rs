//! Experiment orchestration: flat-file configuration, named benchmark
//! configs, seeded multi-trial execution and result aggregation.

pub mod config;
pub mod run;

pub use config::{
    named, named_configs, parse_config, serialize_config, ExperimentConfig, ProblemSource,
};
pub use run::{
    ablation_csv, ablation_suite, aggregate, build_problem, run_experiment, run_trial, Aggregate,
    ProblemInstance, RunOutcome, TrialOutcome, ABLATION_VARIANTS,
};
