//! Slot-by-slot placement under a speed limit.

use serde::{Deserialize, Serialize};

use super::design::{MotionLimit, Norms, ProblemMode};
use super::ga::GaConfig;
use super::solve::{ga_solve, SolveRequest, SolveResult};
use crate::error::{IsacError, Result};
use crate::scenario::Scenario;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySettings {
    pub slots: usize,
    /// Slot length in seconds.
    pub dt: f64,
    /// Maximum UAV speed in m/s.
    pub v_max: f64,
}

impl Default for TrajectorySettings {
    fn default() -> Self {
        Self {
            slots: 5,
            dt: 1.0,
            v_max: 20.0,
        }
    }
}

/// Solve the slots in order. Slot `n > 0` may move each UAV at most
/// `v_max * dt` from where slot `n - 1` left it; slot `n` uses GA seed
/// `cfg.seed + n`.
pub fn solve_trajectory(
    scenario: &Scenario,
    settings: &TrajectorySettings,
    mode: ProblemMode,
    mu: f64,
    norms: Norms,
    cfg: &GaConfig,
) -> Result<Vec<SolveResult>> {
    if settings.slots == 0 {
        return Err(IsacError::InvalidArgument("trajectory needs at least one slot".into()));
    }
    if !(settings.dt >= 0.0 && settings.v_max >= 0.0) {
        return Err(IsacError::InvalidArgument(
            "slot length and speed limit must be non-negative".into(),
        ));
    }
    let max_step = settings.v_max * settings.dt;
    let mut out: Vec<SolveResult> = Vec::with_capacity(settings.slots);
    for n in 0..settings.slots {
        let mut req = SolveRequest::new(scenario, mode, mu, norms);
        if let Some(prev) = out.last() {
            req.motion = Some(MotionLimit {
                previous_xy: prev.design.uav_xy.clone(),
                max_step,
            });
        }
        out.push(ga_solve(&req, &cfg.with_seed(cfg.seed.wrapping_add(n as u64)))?);
    }
    Ok(out)
}
