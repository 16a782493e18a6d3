//! Experiment orchestration for `pdcoea-core`: grid sweeps with
//! per-trial random streams, the error-threshold, runtime-scaling and
//! trajectory experiments, numeric check suites, CSV/JSON persistence and
//! the `pdcoea` command-line interface.

pub mod checks;
pub mod cli;
pub mod config;
pub mod error;
pub mod experiment;
pub mod table;

pub use config::{BudgetRule, Cell, ExperimentKind, ExperimentSpec, Grid, TargetKind};
pub use error::{HarnessError, Result};
pub use experiment::{
    experiment_error_threshold, experiment_runtime_scaling, experiment_trajectory, run_experiment,
};
pub use table::{CellAggregate, ResultTable, TrialRow};
