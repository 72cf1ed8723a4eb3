//! Decision variables, matched beamformers, constraints and the scalarized
//! fitness.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{IsacError, Result};
use crate::geometry::{self, haps_pathloss_amplitude, Position3, SteeringVector};
use crate::link::{
    self, BeamformerSet, ChannelVector, ConstraintId, EchoModel, EchoRelay, ObjectiveValues,
    Violation,
};
use crate::scenario::Scenario;

/// Designs whose largest constraint violation is below this are feasible.
pub const FEASIBILITY_TOL: f64 = 1e-6;

/// Which problem's objective and constraint set is in force.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProblemMode {
    /// Maximize echo power over position and sensing beams; sensing budget,
    /// motion and box constraints.
    Sensing,
    /// Maximize the minimum SINR; total power, motion, box and beampattern
    /// constraints.
    Comm,
    /// Weighted sum of both; union of the constraints plus the SINR floor.
    Multi,
    /// UAV-only reference network: comm constraint set, no HAPS stage.
    BaselineUavOnly,
}

impl ProblemMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            ProblemMode::Sensing => "sensing",
            ProblemMode::Comm => "comm",
            ProblemMode::Multi => "multi",
            ProblemMode::BaselineUavOnly => "baseline-uav-only",
        }
    }

    fn has_sensing_budget(&self) -> bool {
        matches!(self, ProblemMode::Sensing | ProblemMode::Multi)
    }

    fn has_total_power(&self) -> bool {
        !matches!(self, ProblemMode::Sensing)
    }

    fn has_beampattern(&self) -> bool {
        !matches!(self, ProblemMode::Sensing)
    }

    fn has_sinr_floor(&self) -> bool {
        matches!(self, ProblemMode::Multi)
    }

    fn has_haps_stage(&self) -> bool {
        !matches!(self, ProblemMode::BaselineUavOnly)
    }

    /// Whether CU beams are decision variables.
    pub fn optimizes_comm(&self) -> bool {
        !matches!(self, ProblemMode::Sensing)
    }
}

impl fmt::Display for ProblemMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ProblemMode {
    type Err = IsacError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sensing" => Ok(ProblemMode::Sensing),
            "comm" => Ok(ProblemMode::Comm),
            "multi" => Ok(ProblemMode::Multi),
            "baseline-uav-only" | "baseline" => Ok(ProblemMode::BaselineUavOnly),
            other => Err(IsacError::Config(format!("unknown problem mode '{other}'"))),
        }
    }
}

/// UAV positions and per-beam powers. Beams are matched:
/// `w_k = sqrt(p_k) a(q, u_k) / sqrt(G)`, `r_j = sqrt(p'_j) a(q, m_j) / sqrt(G)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignPoint {
    pub uav_xy: Vec<[f64; 2]>,
    pub comm_power: Vec<Vec<f64>>,
    pub sense_power: Vec<Vec<f64>>,
}

impl DesignPoint {
    /// Genes per UAV: `x, y, p_1..p_K, p'_1..p'_J`.
    pub fn genes_per_uav(k: usize, j: usize) -> usize {
        2 + k + j
    }

    pub fn to_genome(&self) -> Vec<f64> {
        let mut g = Vec::new();
        for m in 0..self.uav_xy.len() {
            g.extend_from_slice(&self.uav_xy[m]);
            g.extend_from_slice(&self.comm_power[m]);
            g.extend_from_slice(&self.sense_power[m]);
        }
        g
    }

    pub fn from_genome(genome: &[f64], m: usize, k: usize, j: usize) -> Self {
        let per = Self::genes_per_uav(k, j);
        assert_eq!(genome.len(), m * per, "genome length mismatch");
        let mut d = DesignPoint {
            uav_xy: Vec::with_capacity(m),
            comm_power: Vec::with_capacity(m),
            sense_power: Vec::with_capacity(m),
        };
        for chunk in genome.chunks(per) {
            d.uav_xy.push([chunk[0], chunk[1]]);
            d.comm_power.push(chunk[2..2 + k].to_vec());
            d.sense_power.push(chunk[2 + k..].to_vec());
        }
        d
    }

    /// Everything split evenly over the `K + J` beams of each UAV.
    pub fn equal_split(scenario: &Scenario, uav_xy: Vec<[f64; 2]>) -> Self {
        let (k, j) = (scenario.num_cus(), scenario.num_targets());
        let share = if k + j > 0 {
            scenario.p_max / (k + j) as f64
        } else {
            0.0
        };
        let m = uav_xy.len();
        DesignPoint {
            uav_xy,
            comm_power: vec![vec![share; k]; m],
            sense_power: vec![vec![share; j]; m],
        }
    }

    pub fn total_power(&self, m: usize) -> f64 {
        self.comm_power[m].iter().sum::<f64>() + self.sense_power[m].iter().sum::<f64>()
    }

    pub fn is_nonnegative(&self) -> bool {
        self.comm_power
            .iter()
            .chain(&self.sense_power)
            .flatten()
            .all(|&p| p >= 0.0)
    }
}

/// Positive scaling constants for the two objectives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Norms {
    pub eta_ref: f64,
    pub omega_ref: f64,
}

impl Norms {
    pub const UNIT: Norms = Norms {
        eta_ref: 1.0,
        omega_ref: 1.0,
    };
}

/// Displacement limit relative to the previous slot.
#[derive(Debug, Clone, PartialEq)]
pub struct MotionLimit {
    pub previous_xy: Vec<[f64; 2]>,
    pub max_step: f64,
}

/// Geometry-dependent quantities for one UAV at one position.
#[derive(Debug, Clone)]
pub struct UavGeometry {
    pub position: Position3,
    pub cu_steering: Vec<SteeringVector>,
    pub channels: Vec<ChannelVector>,
    pub target_steering: Vec<SteeringVector>,
    pub target_dist_sq: Vec<f64>,
    pub echo: EchoModel,
    /// HAPS receive phases `c_m`; empty when the HAPS stage is skipped.
    pub haps_rx: Vec<Complex64>,
    pub delta: f64,
}

impl UavGeometry {
    pub fn new(scenario: &Scenario, m: usize, xy: [f64; 2], with_haps: bool) -> Self {
        let a = &scenario.uavs[m];
        let geom = scenario.uav_array;
        let pos = scenario.uav_position(xy);
        let cu_steering: Vec<_> = a
            .cus
            .iter()
            .map(|&c| geometry::steering_toward(geom, pos, c))
            .collect();
        let channels = a
            .cus
            .iter()
            .zip(&cu_steering)
            .map(|(&c, sv)| ChannelVector::from_steering(scenario.beta0, geometry::distance(pos, c), sv))
            .collect();
        let target_steering = a
            .targets
            .iter()
            .map(|&t| geometry::steering_toward(geom, pos, t))
            .collect();
        let target_dist_sq = a
            .targets
            .iter()
            .map(|&t| {
                let d = geometry::distance(pos, t);
                d * d
            })
            .collect();
        let (haps_rx, delta) = if with_haps {
            let hv = geometry::haps_phase_vectors(
                geom,
                scenario.haps_array,
                pos,
                scenario.haps,
                scenario.carrier_freq,
            );
            let delta = haps_pathloss_amplitude(hv.distance, scenario.carrier_freq)
                .expect("HAPS altitude exceeds UAV altitude");
            (hv.haps.entries, delta)
        } else {
            (Vec::new(), 0.0)
        };
        Self {
            position: pos,
            cu_steering,
            channels,
            target_steering,
            target_dist_sq,
            echo: scenario.echo_model(m, pos),
            haps_rx,
            delta,
        }
    }

    pub fn beamformers(&self, comm_power: &[f64], sense_power: &[f64]) -> BeamformerSet {
        let mk = |p: f64, a: &SteeringVector| -> Vec<Complex64> {
            let s = (p.max(0.0) / a.len() as f64).sqrt();
            a.entries.iter().map(|e| e * s).collect()
        };
        BeamformerSet {
            comm: comm_power
                .iter()
                .zip(&self.cu_steering)
                .map(|(&p, a)| mk(p, a))
                .collect(),
            sense: sense_power
                .iter()
                .zip(&self.target_steering)
                .map(|(&p, a)| mk(p, a))
                .collect(),
        }
    }
}

/// Matched beamformers for every UAV of `design`.
pub fn build_matched_beamformers(design: &DesignPoint, scenario: &Scenario) -> Vec<BeamformerSet> {
    design
        .uav_xy
        .iter()
        .enumerate()
        .map(|(m, &xy)| {
            UavGeometry::new(scenario, m, xy, false)
                .beamformers(&design.comm_power[m], &design.sense_power[m])
        })
        .collect()
}

/// Problem definition shared by the GA and the grid oracle.
#[derive(Debug, Clone)]
pub struct Objective<'a> {
    pub scenario: &'a Scenario,
    pub mode: ProblemMode,
    pub mu: f64,
    pub norms: Norms,
    pub penalty_weight: f64,
    pub motion: Option<MotionLimit>,
}

/// Full evaluation of one design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub values: ObjectiveValues,
    /// SINR per UAV per CU, linear.
    pub sinr: Vec<Vec<f64>>,
    /// Beampattern gain per UAV per target.
    pub beampattern: Vec<Vec<f64>>,
}

impl Evaluation {
    pub fn is_feasible(&self) -> bool {
        self.values.is_feasible(FEASIBILITY_TOL)
    }
}

fn rel_excess(value: f64, limit: f64, scale: f64) -> f64 {
    ((value - limit) / scale).max(0.0)
}

impl<'a> Objective<'a> {
    pub fn new(scenario: &'a Scenario, mode: ProblemMode, mu: f64, norms: Norms) -> Self {
        Self {
            scenario,
            mode,
            mu,
            norms,
            penalty_weight: 1e3,
            motion: None,
        }
    }

    pub fn with_penalty(mut self, w: f64) -> Self {
        self.penalty_weight = w;
        self
    }

    pub fn with_motion(mut self, motion: Option<MotionLimit>) -> Self {
        self.motion = motion;
        self
    }

    pub fn geometry(&self, design: &DesignPoint) -> Vec<UavGeometry> {
        let with_haps = self.mode.has_haps_stage();
        design
            .uav_xy
            .iter()
            .enumerate()
            .map(|(m, &xy)| UavGeometry::new(self.scenario, m, xy, with_haps))
            .collect()
    }

    pub fn evaluate(&self, design: &DesignPoint) -> Evaluation {
        let geo = self.geometry(design);
        self.evaluate_with_geometry(design, &geo)
    }

    /// Evaluate with precomputed geometry; `geo[m]` must match `design.uav_xy[m]`.
    pub fn evaluate_with_geometry(&self, design: &DesignPoint, geo: &[UavGeometry]) -> Evaluation {
        let sc = self.scenario;
        let p_max = sc.p_max;
        let mut violations = Vec::new();
        let mut sinrs = Vec::with_capacity(geo.len());
        let mut gains = Vec::with_capacity(geo.len());
        let mut beams = Vec::with_capacity(geo.len());
        let mut eta = f64::INFINITY;

        for (m, g) in geo.iter().enumerate() {
            let bf = g.beamformers(&design.comm_power[m], &design.sense_power[m]);
            let s: Vec<f64> = (0..g.channels.len())
                .map(|k| link::sinr(k, &g.channels, &bf, sc.noise_power))
                .collect();
            let z: Vec<f64> = g
                .target_steering
                .iter()
                .map(|a| link::beampattern_gain_toward(&a.entries, &bf))
                .collect();
            eta = s.iter().copied().fold(eta, f64::min);

            let sense_sum: f64 = design.sense_power[m].iter().sum();
            let total = design.total_power(m);
            if self.mode.has_sensing_budget() {
                violations.push(Violation {
                    id: ConstraintId::SensingBudget { uav: m },
                    magnitude: rel_excess(sense_sum, sc.upsilon * p_max, p_max),
                });
            }
            if let Some(motion) = &self.motion {
                let prev = motion.previous_xy[m];
                let step = (design.uav_xy[m][0] - prev[0]).hypot(design.uav_xy[m][1] - prev[1]);
                violations.push(Violation {
                    id: ConstraintId::Velocity { uav: m },
                    magnitude: (step - motion.max_step).max(0.0),
                });
            }
            let bx = sc.position_box;
            let q = design.uav_xy[m];
            let box_excess = (0..2)
                .map(|i| (bx.min[i] - q[i]).max(q[i] - bx.max[i]).max(0.0))
                .fold(0.0, f64::max);
            violations.push(Violation {
                id: ConstraintId::PositionBox { uav: m },
                magnitude: box_excess,
            });
            if self.mode.has_total_power() {
                violations.push(Violation {
                    id: ConstraintId::TotalPower { uav: m },
                    magnitude: rel_excess(total, p_max, p_max),
                });
            }
            if self.mode.has_beampattern() {
                for (j, (&zeta, &d2)) in z.iter().zip(&g.target_dist_sq).enumerate() {
                    let required = d2 * sc.gamma_th;
                    let magnitude = if required > 0.0 {
                        ((required - zeta) / required).max(0.0)
                    } else {
                        0.0
                    };
                    violations.push(Violation {
                        id: ConstraintId::Beampattern { uav: m, target: j },
                        magnitude,
                    });
                }
            }
            if self.mode.has_sinr_floor() {
                for (k, &sk) in s.iter().enumerate() {
                    let magnitude = if sc.sinr_th > 0.0 {
                        ((sc.sinr_th - sk) / sc.sinr_th).max(0.0)
                    } else {
                        0.0
                    };
                    violations.push(Violation {
                        id: ConstraintId::SinrFloor { uav: m, cu: k },
                        magnitude,
                    });
                }
            }
            sinrs.push(s);
            gains.push(z);
            beams.push(bf);
        }
        if !eta.is_finite() {
            eta = 0.0;
        }

        let omega = if self.mode.has_haps_stage() {
            let relays: Vec<EchoRelay<'_>> = geo
                .iter()
                .zip(&beams)
                .map(|(g, bf)| EchoRelay {
                    bf,
                    echo: &g.echo,
                    haps_rx: &g.haps_rx,
                    delta: g.delta,
                    elements: sc.elements(),
                })
                .collect();
            link::omega(&relays)
        } else {
            0.0
        };

        let penalty: f64 = violations.iter().map(|v| v.magnitude * v.magnitude).sum();
        let fitness = self.mu * omega / self.norms.omega_ref
            + (1.0 - self.mu) * eta / self.norms.eta_ref
            - self.penalty_weight * penalty;

        Evaluation {
            values: ObjectiveValues {
                eta,
                omega,
                min_rate: link::achievable_rate(eta),
                violations,
                fitness,
            },
            sinr: sinrs,
            beampattern: gains,
        }
    }

    /// Upper bound of each gene; the lower bound of every power gene is 0.
    pub fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        let sc = self.scenario;
        let (k, j) = (sc.num_cus(), sc.num_targets());
        let comm_cap = if self.mode.optimizes_comm() { sc.p_max } else { 0.0 };
        let sense_cap = if self.mode.has_sensing_budget() {
            sc.upsilon * sc.p_max
        } else {
            sc.p_max
        };
        let mut lo = Vec::new();
        let mut hi = Vec::new();
        for m in 0..sc.num_uavs() {
            if sc.fix_uav_positions {
                lo.extend_from_slice(&sc.initial_uav_xy[m]);
                hi.extend_from_slice(&sc.initial_uav_xy[m]);
            } else {
                let mut bmin = sc.position_box.min;
                let mut bmax = sc.position_box.max;
                if let Some(motion) = &self.motion {
                    for i in 0..2 {
                        bmin[i] = bmin[i].max(motion.previous_xy[m][i] - motion.max_step);
                        bmax[i] = bmax[i].min(motion.previous_xy[m][i] + motion.max_step);
                    }
                }
                lo.extend_from_slice(&bmin);
                hi.extend_from_slice(&bmax);
            }
            lo.extend(std::iter::repeat_n(0.0, k + j));
            hi.extend(std::iter::repeat_n(comm_cap, k));
            hi.extend(std::iter::repeat_n(sense_cap, j));
        }
        (lo, hi)
    }

    /// Map a design onto the linear part of the feasible set: clamp positions
    /// into the box (and motion disc), then scale powers down onto the
    /// active budget constraints.
    pub fn repair(&self, design: &mut DesignPoint) {
        let sc = self.scenario;
        for m in 0..design.uav_xy.len() {
            let mut q = if sc.fix_uav_positions {
                sc.initial_uav_xy[m]
            } else {
                sc.position_box.clamp(design.uav_xy[m])
            };
            if let Some(motion) = &self.motion {
                let c = motion.previous_xy[m];
                let (dx, dy) = (q[0] - c[0], q[1] - c[1]);
                let r = dx.hypot(dy);
                if r > motion.max_step {
                    let s = if r > 0.0 { motion.max_step / r } else { 0.0 };
                    q = [c[0] + dx * s, c[1] + dy * s];
                }
                // Clamping toward a box that contains the disc center never
                // leaves the disc.
                if !sc.fix_uav_positions {
                    q = sc.position_box.clamp(q);
                }
            }
            design.uav_xy[m] = q;

            for p in design.comm_power[m].iter_mut().chain(design.sense_power[m].iter_mut()) {
                if !(*p > 0.0) {
                    *p = 0.0;
                }
            }
            if !self.mode.optimizes_comm() {
                design.comm_power[m].iter_mut().for_each(|p| *p = 0.0);
            }
            if self.mode.has_total_power() {
                let total = design.total_power(m);
                if total > sc.p_max {
                    let s = sc.p_max / total;
                    for p in design.comm_power[m]
                        .iter_mut()
                        .chain(design.sense_power[m].iter_mut())
                    {
                        *p *= s;
                    }
                }
            }
            if self.mode.has_sensing_budget() {
                let cap = sc.upsilon * sc.p_max;
                let sense: f64 = design.sense_power[m].iter().sum();
                if sense > cap {
                    let s = cap / sense;
                    design.sense_power[m].iter_mut().for_each(|p| *p *= s);
                }
            }
        }
    }
}

/// Constraint violations of `design` under `mode`; one entry per active
/// constraint, zero when satisfied.
pub fn evaluate_constraints(
    design: &DesignPoint,
    scenario: &Scenario,
    mode: ProblemMode,
    motion: Option<MotionLimit>,
) -> Vec<Violation> {
    Objective::new(scenario, mode, 0.0, Norms::UNIT)
        .with_motion(motion)
        .evaluate(design)
        .values
        .violations
}

/// Scalarized fitness `mu Omega/Omega_ref + (1 - mu) eta/eta_ref - w sum v^2`.
pub fn fitness(
    design: &DesignPoint,
    scenario: &Scenario,
    mode: ProblemMode,
    mu: f64,
    norms: Norms,
    penalty_weight: f64,
) -> ObjectiveValues {
    Objective::new(scenario, mode, mu, norms)
        .with_penalty(penalty_weight)
        .evaluate(design)
        .values
}

/// Feasibility-first ordering: a feasible design beats an infeasible one;
/// otherwise the higher fitness wins. Returns true when `a` is strictly better.
pub fn is_better(a: &ObjectiveValues, b: &ObjectiveValues) -> bool {
    let fa = a.is_feasible(FEASIBILITY_TOL);
    let fb = b.is_feasible(FEASIBILITY_TOL);
    match (fa, fb) {
        (true, false) => true,
        (false, true) => false,
        _ => a.fitness > b.fitness,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::ScenarioConfig;
    use approx::assert_relative_eq;

    fn one_target_at(d_horizontal: f64) -> Scenario {
        // UAV at (500, 500, 40); target straight out along x.
        ScenarioConfig {
            num_cus: 1,
            num_targets: 1,
            cu_positions: Some(vec![[100.0, 100.0]]),
            target_positions: Some(vec![[500.0 + d_horizontal, 500.0]]),
            ..Default::default()
        }
        .resolve()
        .unwrap()
    }

    #[test]
    fn mode_parsing() {
        assert_eq!("multi".parse::<ProblemMode>().unwrap(), ProblemMode::Multi);
        assert_eq!(
            "baseline-uav-only".parse::<ProblemMode>().unwrap(),
            ProblemMode::BaselineUavOnly
        );
        assert!(matches!(
            "bogus".parse::<ProblemMode>(),
            Err(IsacError::Config(_))
        ));
    }

    #[test]
    fn genome_round_trip() {
        let d = DesignPoint {
            uav_xy: vec![[1.0, 2.0], [3.0, 4.0]],
            comm_power: vec![vec![0.1, 0.2], vec![0.3, 0.4]],
            sense_power: vec![vec![0.5], vec![0.6]],
        };
        assert_eq!(DesignPoint::from_genome(&d.to_genome(), 2, 2, 1), d);
    }

    #[test]
    fn matched_beams_carry_their_power() {
        let sc = ScenarioConfig::default().resolve().unwrap();
        let d = DesignPoint {
            uav_xy: vec![[321.0, 654.0]],
            comm_power: vec![vec![0.0, 0.37, 1.9, 0.01]],
            sense_power: vec![vec![0.2, 0.0, 0.7, 0.05]],
        };
        let bf = &build_matched_beamformers(&d, &sc)[0];
        assert!(bf.comm[0].iter().all(|e| e.norm() == 0.0));
        for (w, p) in bf.comm.iter().zip(&d.comm_power[0]) {
            assert!((geometry::norm_sqr(w) - p).abs() < 1e-12);
        }
        for (r, p) in bf.sense.iter().zip(&d.sense_power[0]) {
            assert!((geometry::norm_sqr(r) - p).abs() < 1e-12);
        }
    }

    #[test]
    fn nadir_target_beam_entries() {
        let sc = one_target_at(0.0);
        let d = DesignPoint {
            uav_xy: vec![[500.0, 500.0]],
            comm_power: vec![vec![0.0]],
            sense_power: vec![vec![1.0]],
        };
        let bf = &build_matched_beamformers(&d, &sc)[0];
        for e in &bf.sense[0] {
            assert_relative_eq!(e.norm(), 0.25, max_relative = 1e-12);
        }
    }

    #[test]
    fn zero_power_violates_only_sensing_constraints() {
        let sc = ScenarioConfig::default().resolve().unwrap();
        let mut d = DesignPoint::equal_split(&sc, vec![[500.0, 500.0]]);
        d.comm_power[0].iter_mut().for_each(|p| *p = 0.0);
        d.sense_power[0].iter_mut().for_each(|p| *p = 0.0);
        let v = evaluate_constraints(&d, &sc, ProblemMode::Multi, None);
        for viol in &v {
            match viol.id {
                ConstraintId::Beampattern { .. } | ConstraintId::SinrFloor { .. } => {
                    assert!(viol.magnitude > 0.0, "{viol:?}")
                }
                _ => assert_eq!(viol.magnitude, 0.0, "{viol:?}"),
            }
        }
    }

    #[test]
    fn full_budget_is_on_the_boundary() {
        let sc = ScenarioConfig::default().resolve().unwrap();
        let d = DesignPoint::equal_split(&sc, vec![[500.0, 500.0]]);
        assert_relative_eq!(d.total_power(0), sc.p_max, max_relative = 1e-12);
        let v = evaluate_constraints(&d, &sc, ProblemMode::Comm, None);
        let total = v
            .iter()
            .find(|v| matches!(v.id, ConstraintId::TotalPower { .. }))
            .unwrap();
        assert!(total.magnitude < 1e-12);
    }

    #[test]
    fn beampattern_threshold_example() {
        // d = 100 m from the UAV: horizontal sqrt(100^2 - 40^2).
        let sc = one_target_at((100.0f64.powi(2) - 40.0f64.powi(2)).sqrt());
        let d = DesignPoint {
            uav_xy: vec![[500.0, 500.0]],
            comm_power: vec![vec![0.0]],
            sense_power: vec![vec![1.0]],
        };
        let obj = Objective::new(&sc, ProblemMode::Comm, 0.0, Norms::UNIT);
        let e = obj.evaluate(&d);
        assert_relative_eq!(e.beampattern[0][0], 16.0, max_relative = 1e-12);
        let geo = obj.geometry(&d);
        assert_relative_eq!(geo[0].target_dist_sq[0] * sc.gamma_th, 0.1, max_relative = 1e-9);
        let bp = e
            .values
            .violations
            .iter()
            .find(|v| matches!(v.id, ConstraintId::Beampattern { .. }))
            .unwrap();
        assert_eq!(bp.magnitude, 0.0);
    }

    #[test]
    fn scalarization_endpoints() {
        let sc = ScenarioConfig::default().resolve().unwrap();
        let d = DesignPoint::equal_split(&sc, vec![[400.0, 600.0]]);
        let norms = Norms {
            eta_ref: 2.0,
            omega_ref: 1e-9,
        };
        let v0 = fitness(&d, &sc, ProblemMode::Multi, 0.0, norms, 0.0);
        assert_relative_eq!(v0.fitness, v0.eta / 2.0, max_relative = 1e-12);
        let v1 = fitness(&d, &sc, ProblemMode::Multi, 1.0, norms, 0.0);
        assert_relative_eq!(v1.fitness, v1.omega / 1e-9, max_relative = 1e-12);
        assert_eq!(v0.min_rate, (1.0 + v0.eta).log2());
    }

    #[test]
    fn repair_enforces_budgets() {
        let sc = ScenarioConfig::default().resolve().unwrap();
        let obj = Objective::new(&sc, ProblemMode::Multi, 0.5, Norms::UNIT);
        let mut d = DesignPoint {
            uav_xy: vec![[-50.0, 2000.0]],
            comm_power: vec![vec![3.0, -1.0, 2.0, 4.0]],
            sense_power: vec![vec![3.0, 3.0, 0.0, f64::NAN]],
        };
        obj.repair(&mut d);
        assert_eq!(d.uav_xy[0], [0.0, 1000.0]);
        assert!(d.is_nonnegative());
        assert!(d.total_power(0) <= sc.p_max * (1.0 + 1e-12));
        assert!(d.sense_power[0].iter().sum::<f64>() <= sc.upsilon * sc.p_max * (1.0 + 1e-12));
        let v = obj.evaluate(&d).values;
        for viol in &v.violations {
            if matches!(
                viol.id,
                ConstraintId::TotalPower { .. }
                    | ConstraintId::SensingBudget { .. }
                    | ConstraintId::PositionBox { .. }
            ) {
                assert!(viol.magnitude <= 1e-12);
            }
        }
    }

    #[test]
    fn repair_keeps_motion_disc() {
        let sc = ScenarioConfig::default().resolve().unwrap();
        let motion = MotionLimit {
            previous_xy: vec![[990.0, 10.0]],
            max_step: 30.0,
        };
        let obj = Objective::new(&sc, ProblemMode::Comm, 0.0, Norms::UNIT).with_motion(Some(motion));
        let mut d = DesignPoint::equal_split(&sc, vec![[1000.0, 900.0]]);
        obj.repair(&mut d);
        let q = d.uav_xy[0];
        assert!((q[0] - 990.0).hypot(q[1] - 10.0) <= 30.0 + 1e-9);
        assert!(sc.position_box.contains(q));
    }

    #[test]
    fn feasibility_first_ordering() {
        let mk = |fitness: f64, v: f64| ObjectiveValues {
            eta: 0.0,
            omega: 0.0,
            min_rate: 0.0,
            violations: vec![Violation {
                id: ConstraintId::TotalPower { uav: 0 },
                magnitude: v,
            }],
            fitness,
        };
        assert!(is_better(&mk(0.1, 0.0), &mk(5.0, 1e-3)));
        assert!(is_better(&mk(0.2, 0.0), &mk(0.1, 0.0)));
        assert!(is_better(&mk(-1.0, 1e-2), &mk(-2.0, 1e-1)));
        assert!(!is_better(&mk(0.1, 0.0), &mk(0.1, 0.0)));
    }
}
