//! Exhaustive grid search over power allocations, used as ground truth for
//! the GA on small instances.

use rayon::prelude::*;

use super::design::{is_better, DesignPoint, Norms, Objective, ProblemMode};
use crate::error::{IsacError, Result};
use crate::link::ObjectiveValues;
use crate::scenario::Scenario;

/// Largest `K + J` the oracle accepts.
pub const MAX_BEAMS: usize = 4;

#[derive(Debug, Clone)]
pub struct OracleSettings {
    /// Power grid step is `P_max / steps`.
    pub steps: usize,
    /// Points per axis of the UAV position grid; 0 or 1 keeps the starting position.
    pub position_grid: usize,
    pub penalty_weight: f64,
}

impl Default for OracleSettings {
    fn default() -> Self {
        Self {
            steps: 200,
            position_grid: 0,
            penalty_weight: 1e3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct OracleResult {
    pub design: DesignPoint,
    pub values: ObjectiveValues,
    pub evaluated: usize,
}

/// All `n`-tuples of non-negative integers with sum at most `total`.
fn compositions(n: usize, total: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if prefix.len() == n {
        out.push(prefix.clone());
        return;
    }
    let used: usize = prefix.iter().sum();
    for v in 0..=total - used {
        prefix.push(v);
        compositions(n, total, prefix, out);
        prefix.pop();
    }
}

pub fn grid_oracle(
    scenario: &Scenario,
    mu: f64,
    mode: ProblemMode,
    norms: Norms,
    settings: &OracleSettings,
) -> Result<OracleResult> {
    let (m, k, j) = (scenario.num_uavs(), scenario.num_cus(), scenario.num_targets());
    if m != 1 || k + j > MAX_BEAMS {
        return Err(IsacError::TooLarge(format!(
            "grid oracle needs M = 1 and K + J <= {MAX_BEAMS}, got M = {m}, K + J = {}",
            k + j
        )));
    }
    if settings.steps == 0 {
        return Err(IsacError::InvalidArgument("oracle needs at least one grid step".into()));
    }
    let objective = Objective::new(scenario, mode, mu, norms).with_penalty(settings.penalty_weight);

    let positions: Vec<[f64; 2]> = if scenario.fix_uav_positions || settings.position_grid <= 1 {
        vec![scenario.initial_uav_xy[0]]
    } else {
        let b = scenario.position_box;
        let n = settings.position_grid;
        let at = |i: usize, lo: f64, hi: f64| lo + (hi - lo) * i as f64 / (n - 1) as f64;
        (0..n)
            .flat_map(|ix| (0..n).map(move |iy| (ix, iy)))
            .map(|(ix, iy)| [at(ix, b.min[0], b.max[0]), at(iy, b.min[1], b.max[1])])
            .collect()
    };

    let beams = if mode.optimizes_comm() { k + j } else { j };
    let mut grid = Vec::new();
    compositions(beams, settings.steps, &mut Vec::new(), &mut grid);
    let unit = scenario.p_max / settings.steps as f64;

    let mut best: Option<(DesignPoint, ObjectiveValues)> = None;
    let mut evaluated = 0;
    for q in positions {
        let probe = DesignPoint {
            uav_xy: vec![q],
            comm_power: vec![vec![0.0; k]],
            sense_power: vec![vec![0.0; j]],
        };
        let geo = objective.geometry(&probe);
        let local = grid
            .par_iter()
            .map(|tuple| {
                let (comm, sense) = if mode.optimizes_comm() {
                    (
                        tuple[..k].iter().map(|&n| n as f64 * unit).collect(),
                        tuple[k..].iter().map(|&n| n as f64 * unit).collect(),
                    )
                } else {
                    (vec![0.0; k], tuple.iter().map(|&n| n as f64 * unit).collect())
                };
                let d = DesignPoint {
                    uav_xy: vec![q],
                    comm_power: vec![comm],
                    sense_power: vec![sense],
                };
                let v = objective.evaluate_with_geometry(&d, &geo).values;
                (d, v)
            })
            .reduce_with(|a, b| if is_better(&b.1, &a.1) { b } else { a });
        evaluated += grid.len();
        if let Some(cand) = local {
            best = match best {
                Some(b) if !is_better(&cand.1, &b.1) => Some(b),
                _ => Some(cand),
            };
        }
    }
    let (design, values) = best.expect("grid is never empty");
    Ok(OracleResult {
        design,
        values,
        evaluated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn composition_count() {
        let mut out = Vec::new();
        compositions(3, 10, &mut Vec::new(), &mut out);
        // C(10 + 3, 3)
        assert_eq!(out.len(), 286);
        assert!(out.iter().all(|t| t.iter().sum::<usize>() <= 10));
    }

    #[test]
    fn refuses_large_instances() {
        let sc = crate::scenario::ScenarioConfig::default().resolve().unwrap();
        let r = grid_oracle(&sc, 0.0, ProblemMode::Comm, Norms::UNIT, &OracleSettings::default());
        assert!(matches!(r, Err(IsacError::TooLarge(_))));
    }
}
