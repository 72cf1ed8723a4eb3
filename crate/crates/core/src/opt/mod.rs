//! Matched-beam design space, genetic optimizer and reference solvers.

pub mod design;
pub mod ga;
pub mod oracle;
pub mod pareto;
pub mod solve;
pub mod trajectory;

pub use design::{
    build_matched_beamformers, evaluate_constraints, fitness, is_better, DesignPoint, Evaluation,
    MotionLimit, Norms, Objective, ProblemMode, FEASIBILITY_TOL,
};
pub use ga::GaConfig;
pub use oracle::{grid_oracle, OracleResult, OracleSettings};
pub use pareto::{normalize_objectives, pareto_sweep, Normalization, ParetoRecord, ParetoSweep};
pub use solve::{ga_solve, ga_solve_best_of, provisional_norms, SolveRequest, SolveResult};
pub use trajectory::{solve_trajectory, TrajectorySettings};
