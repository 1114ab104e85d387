//! Experiment drivers, report emission and the command-line front end.

mod checks;
mod cli;
mod config;
mod report;
mod runners;
mod trials;

pub use checks::{run_oracles, OracleCheck, MODULES};
pub use cli::cli_main;
pub use config::{parse_entries, ExperimentConfig, Format, InputSpec, Mode, WeightSpec};
pub use report::{relative_change, summarize, Cell, ExperimentReport};
pub use runners::{
    center_subsample, counterexample_tests, run, run_counterexample_experiment, run_gf_experiment, run_hedberg_sweep,
    run_theorem_experiment, COUNTEREXAMPLE_COLUMNS, FUBINI_TOLERANCE, GF_COLUMNS, HEDBERG_COLUMNS, THEOREM_COLUMNS,
};
pub use trials::{random_input, trial_sample, trial_seed, Bump, InputFn, TrialSample};
