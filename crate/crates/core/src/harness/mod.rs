//! Experiment drivers, output formats and model cross-checks.

pub mod experiments;
pub mod validate;

pub use experiments::{
    run_experiment, run_gamma_sweep, run_k_sweep_with_baseline, run_pareto, run_pmax_sweep,
    run_single, run_trajectory, Cell, ExperimentKind, ExperimentResult, RunConfig, SweepSettings,
};
pub use validate::run_validation;
