//! GA-driven solvers for the sensing, max-min SINR and scalarized problems.

use serde::{Deserialize, Serialize};

use super::design::{DesignPoint, Evaluation, MotionLimit, Norms, Objective, ProblemMode};
use super::ga::{self, GaConfig, GaProblem};
use crate::error::{IsacError, Result};
use crate::link::ObjectiveValues;
use crate::scenario::Scenario;

/// Inputs of one GA solve beyond the GA settings.
#[derive(Debug, Clone)]
pub struct SolveRequest<'a> {
    pub scenario: &'a Scenario,
    pub mode: ProblemMode,
    pub mu: f64,
    pub norms: Norms,
    pub motion: Option<MotionLimit>,
    /// Designs injected into the initial population.
    pub warm_start: Vec<DesignPoint>,
}

impl<'a> SolveRequest<'a> {
    pub fn new(scenario: &'a Scenario, mode: ProblemMode, mu: f64, norms: Norms) -> Self {
        Self {
            scenario,
            mode,
            mu,
            norms,
            motion: None,
            warm_start: Vec::new(),
        }
    }

    pub fn objective(&self, penalty_weight: f64) -> Objective<'a> {
        Objective::new(self.scenario, self.mode, self.mu, self.norms)
            .with_penalty(penalty_weight)
            .with_motion(self.motion.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub mode: ProblemMode,
    pub mu: f64,
    pub seed: u64,
    pub design: DesignPoint,
    pub values: ObjectiveValues,
    pub sinr: Vec<Vec<f64>>,
    pub feasible: bool,
    pub history: Vec<f64>,
    pub generations_run: usize,
}

struct DesignProblem<'a> {
    objective: Objective<'a>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    dims: (usize, usize, usize),
}

impl<'a> DesignProblem<'a> {
    fn new(objective: Objective<'a>) -> Self {
        let (lo, hi) = objective.bounds();
        let sc = objective.scenario;
        let dims = (sc.num_uavs(), sc.num_cus(), sc.num_targets());
        Self {
            objective,
            lo,
            hi,
            dims,
        }
    }

    fn decode(&self, genome: &[f64]) -> DesignPoint {
        let (m, k, j) = self.dims;
        DesignPoint::from_genome(genome, m, k, j)
    }
}

impl GaProblem for DesignProblem<'_> {
    type Eval = Evaluation;

    fn lower(&self) -> &[f64] {
        &self.lo
    }

    fn upper(&self) -> &[f64] {
        &self.hi
    }

    fn repair(&self, genome: &mut [f64]) {
        let mut d = self.decode(genome);
        self.objective.repair(&mut d);
        genome.copy_from_slice(&d.to_genome());
    }

    fn evaluate(&self, genome: &[f64]) -> Evaluation {
        self.objective.evaluate(&self.decode(genome))
    }

    fn fitness(&self, e: &Evaluation) -> f64 {
        e.values.fitness
    }

    fn feasible(&self, e: &Evaluation) -> bool {
        e.is_feasible()
    }
}

/// Optimize positions and powers for one `(mode, mu)` with the GA.
pub fn ga_solve(req: &SolveRequest<'_>, cfg: &GaConfig) -> Result<SolveResult> {
    if !(0.0..=1.0).contains(&req.mu) {
        return Err(IsacError::InvalidArgument(format!(
            "mu must lie in [0, 1], got {}",
            req.mu
        )));
    }
    if !(req.norms.eta_ref > 0.0 && req.norms.omega_ref > 0.0) {
        return Err(IsacError::InvalidArgument(
            "normalization constants must be positive".into(),
        ));
    }
    let problem = DesignProblem::new(req.objective(cfg.penalty_weight));
    let initial: Vec<Vec<f64>> = req.warm_start.iter().map(|d| d.to_genome()).collect();
    let out = ga::run(&problem, cfg, &initial)?;
    let feasible = out.best_eval.is_feasible();
    Ok(SolveResult {
        mode: req.mode,
        mu: req.mu,
        seed: cfg.seed,
        design: problem.decode(&out.best_genome),
        values: out.best_eval.values,
        sinr: out.best_eval.sinr,
        feasible,
        history: out.history,
        generations_run: out.generations_run,
    })
}

/// Run `seeds` independent solves (seed, seed+1, ...) and keep the best
/// under the feasibility-first ordering.
pub fn ga_solve_best_of(req: &SolveRequest<'_>, cfg: &GaConfig, seeds: usize) -> Result<SolveResult> {
    let mut best: Option<SolveResult> = None;
    for s in 0..seeds.max(1) {
        let r = ga_solve(req, &cfg.with_seed(cfg.seed.wrapping_add(s as u64)))?;
        best = match best {
            Some(b) if !super::design::is_better(&r.values, &b.values) => Some(b),
            _ => Some(r),
        };
    }
    Ok(best.expect("at least one seed"))
}

/// Scaling constants from a fixed reference design (equal power split with
/// the UAVs at their starting positions). Used before any optimized
/// reference exists.
pub fn provisional_norms(scenario: &Scenario) -> Norms {
    let d = DesignPoint::equal_split(scenario, scenario.initial_uav_xy.clone());
    let v = Objective::new(scenario, ProblemMode::Multi, 0.0, Norms::UNIT)
        .evaluate(&d)
        .values;
    let pos = |x: f64| if x.is_finite() && x > 0.0 { x } else { 1.0 };
    Norms {
        eta_ref: pos(v.eta),
        omega_ref: pos(v.omega),
    }
}

/// Max-min SINR solve (comm constraint set, mu = 0).
pub fn solve_max_min_sinr(scenario: &Scenario, cfg: &GaConfig) -> Result<SolveResult> {
    let req = SolveRequest::new(scenario, ProblemMode::Comm, 0.0, provisional_norms(scenario));
    ga_solve(&req, cfg)
}

/// Echo-power solve (sensing constraint set, mu = 1).
pub fn solve_sensing_power(scenario: &Scenario, cfg: &GaConfig) -> Result<SolveResult> {
    let req = SolveRequest::new(scenario, ProblemMode::Sensing, 1.0, provisional_norms(scenario));
    ga_solve(&req, cfg)
}
