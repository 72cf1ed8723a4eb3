//! Objective normalization and Pareto-weight sweeps.

use serde::{Deserialize, Serialize};

use super::design::{is_better, DesignPoint, Norms, Objective, ProblemMode};
use super::ga::GaConfig;
use super::solve::{ga_solve_best_of, provisional_norms, SolveRequest, SolveResult};
use crate::error::{IsacError, Result};
use crate::scenario::Scenario;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    pub norms: Norms,
    /// Max-min SINR reference solve (mu = 0).
    pub comm: SolveResult,
    /// Echo-power reference solve (mu = 1).
    pub sensing: SolveResult,
}

/// Self-normalization: `eta_ref` is the best minimum SINR of the max-min
/// problem and `omega_ref` the best echo power of the sensing problem.
pub fn normalize_objectives(
    scenario: &Scenario,
    cfg: &GaConfig,
    seeds: usize,
) -> Result<Normalization> {
    let provisional = provisional_norms(scenario);
    let comm_req = SolveRequest::new(scenario, ProblemMode::Comm, 0.0, provisional);
    let sense_req = SolveRequest::new(scenario, ProblemMode::Sensing, 1.0, provisional);
    let (comm, sensing) = rayon::join(
        || ga_solve_best_of(&comm_req, cfg, seeds),
        || ga_solve_best_of(&sense_req, cfg, seeds),
    );
    let (comm, sensing) = (comm?, sensing?);
    if !comm.feasible {
        return Err(IsacError::Infeasible(format!(
            "no design met the max-min SINR constraints (largest violation {:.3e})",
            comm.values.max_violation()
        )));
    }
    if !(comm.values.eta > 0.0) {
        return Err(IsacError::Infeasible(
            "best minimum SINR is zero; nothing to normalize against".into(),
        ));
    }
    if !(sensing.values.omega > 0.0) {
        return Err(IsacError::Infeasible(
            "best echo power is zero; check targets, upsilon and reflection amplitudes".into(),
        ));
    }
    Ok(Normalization {
        norms: Norms {
            eta_ref: comm.values.eta,
            omega_ref: sensing.values.omega,
        },
        comm,
        sensing,
    })
}

/// One point of a Pareto-weight sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoRecord {
    pub mu: f64,
    pub eta: f64,
    pub omega: f64,
    pub eta_norm: f64,
    pub omega_norm: f64,
    pub feasible: bool,
    pub design: DesignPoint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoSweep {
    pub normalization: Normalization,
    pub records: Vec<ParetoRecord>,
}

fn record(mu: f64, r: &SolveResult, norms: Norms) -> ParetoRecord {
    ParetoRecord {
        mu,
        eta: r.values.eta,
        omega: r.values.omega,
        eta_norm: r.values.eta / norms.eta_ref,
        omega_norm: r.values.omega / norms.omega_ref,
        feasible: r.feasible,
        design: r.design.clone(),
    }
}

/// Solve the scalarized problem for every `mu`. The endpoints `mu = 0` and
/// `mu = 1` are the normalization solves themselves. Interior weights use
/// the multi-objective constraint set and are solved in two chained passes,
/// first in increasing and then in decreasing `mu`; every solve is seeded
/// with both endpoint designs, the neighbouring weight's design from the
/// same pass and, in the second pass, its own first-pass design. The better
/// of the two passes is kept. Finally every interior weight is re-scored
/// against all designs of the sweep and adopts any that beats its own.
/// Records come back sorted by `mu`.
pub fn pareto_sweep(
    scenario: &Scenario,
    mu_list: &[f64],
    cfg: &GaConfig,
    seeds: usize,
) -> Result<ParetoSweep> {
    if mu_list.is_empty() {
        return Err(IsacError::InvalidArgument("mu list is empty".into()));
    }
    if let Some(bad) = mu_list.iter().find(|mu| !(0.0..=1.0).contains(*mu)) {
        return Err(IsacError::InvalidArgument(format!(
            "mu values must lie in [0, 1], got {bad}"
        )));
    }
    let normalization = normalize_objectives(scenario, cfg, seeds)?;
    let norms = normalization.norms;
    let mut mus = mu_list.to_vec();
    mus.sort_by(f64::total_cmp);

    let endpoints = [
        normalization.comm.design.clone(),
        normalization.sensing.design.clone(),
    ];
    let solve = |mu: f64, extra: Vec<DesignPoint>| -> Result<SolveResult> {
        let mut req = SolveRequest::new(scenario, ProblemMode::Multi, mu, norms);
        req.warm_start = endpoints.to_vec();
        req.warm_start.extend(extra);
        ga_solve_best_of(&req, cfg, seeds)
    };

    let mut results: Vec<SolveResult> = Vec::with_capacity(mus.len());
    for &mu in &mus {
        let r = if mu == 0.0 {
            normalization.comm.clone()
        } else if mu == 1.0 {
            normalization.sensing.clone()
        } else {
            solve(mu, results.last().map(|r| r.design.clone()).into_iter().collect())?
        };
        results.push(r);
    }
    let mut next: Option<DesignPoint> = None;
    for i in (0..mus.len()).rev() {
        let mu = mus[i];
        if mu > 0.0 && mu < 1.0 {
            let mut extra = vec![results[i].design.clone()];
            extra.extend(next.take());
            let r = solve(mu, extra)?;
            if is_better(&r.values, &results[i].values) {
                results[i] = r;
            }
        }
        next = Some(results[i].design.clone());
    }
    let candidates: Vec<DesignPoint> = results.iter().map(|r| r.design.clone()).collect();
    for (i, &mu) in mus.iter().enumerate() {
        if mu == 0.0 || mu == 1.0 {
            continue;
        }
        let obj = Objective::new(scenario, ProblemMode::Multi, mu, norms).with_penalty(cfg.penalty_weight);
        for d in &candidates {
            let e = obj.evaluate(d);
            if is_better(&e.values, &results[i].values) {
                let r = &mut results[i];
                r.feasible = e.is_feasible();
                r.design = d.clone();
                r.values = e.values;
                r.sinr = e.sinr;
            }
        }
    }
    let records = mus
        .iter()
        .zip(&results)
        .map(|(&mu, r)| record(mu, r, norms))
        .collect();
    Ok(ParetoSweep {
        normalization,
        records,
    })
}

/// Whether `a` dominates `b` when maximizing both `(eta, omega)`.
pub fn dominates(a: (f64, f64), b: (f64, f64)) -> bool {
    a.0 >= b.0 && a.1 >= b.1 && (a.0 > b.0 || a.1 > b.1)
}

/// Indices of points not dominated by any other point.
pub fn nondominated(points: &[(f64, f64)]) -> Vec<usize> {
    (0..points.len())
        .filter(|&i| {
            !points
                .iter()
                .enumerate()
                .any(|(j, &p)| j != i && dominates(p, points[i]))
        })
        .collect()
}
