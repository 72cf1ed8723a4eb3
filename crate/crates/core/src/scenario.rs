//! World description: arrays, node positions, power budgets and thresholds.
//!
//! [`ScenarioConfig`] is the on-disk form. Power-like fields are in dB/dBm
//! there and are converted once, in [`ScenarioConfig::resolve`], into a
//! [`Scenario`] that carries linear SI units only.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{IsacError, Result};
use crate::geometry::{self, ArrayGeometry, Position3};
use crate::link::EchoModel;

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn watts_to_dbm(w: f64) -> f64 {
    10.0 * w.log10() + 30.0
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EchoConfig {
    /// Radar cross-section per target, m^2. Missing entries default to 1.
    pub rcs: Option<Vec<f64>>,
    /// Fixed reflection amplitudes per target; overrides the RCS model.
    pub reflection_amp: Option<Vec<f64>>,
}


#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PositionBox {
    pub min: [f64; 2],
    pub max: [f64; 2],
}

impl PositionBox {
    pub fn contains(&self, xy: [f64; 2]) -> bool {
        (0..2).all(|i| xy[i] >= self.min[i] && xy[i] <= self.max[i])
    }

    pub fn clamp(&self, xy: [f64; 2]) -> [f64; 2] {
        [
            xy[0].clamp(self.min[0], self.max[0]),
            xy[1].clamp(self.min[1], self.max[1]),
        ]
    }

    pub fn center(&self) -> [f64; 2] {
        [
            0.5 * (self.min[0] + self.max[0]),
            0.5 * (self.min[1] + self.max[1]),
        ]
    }

    pub fn diagonal(&self) -> f64 {
        (self.max[0] - self.min[0]).hypot(self.max[1] - self.min[1])
    }
}

/// Scenario as read from JSON. Every field is optional; defaults reproduce
/// the reference single-UAV setup (4 CUs, 4 targets, 4x4 UAV array, 20x20
/// HAPS array, 37 dBm budget, 120 GHz backhaul).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Side of the square service area, m.
    pub arena: f64,
    pub num_uavs: usize,
    /// CUs per UAV.
    pub num_cus: usize,
    /// Sensing targets per UAV.
    pub num_targets: usize,
    pub uav_altitude: f64,
    pub haps_altitude: f64,
    /// Defaults to the arena center.
    pub haps_xy: Option<[f64; 2]>,
    pub beta0_db: f64,
    pub p_max_dbm: f64,
    pub noise_power_dbm: f64,
    /// HAPS per-element receiver noise, only used by the symbol-level relay check.
    pub haps_noise_power_dbm: f64,
    pub gamma_th: f64,
    pub sinr_th_db: f64,
    /// Fraction of the budget available to sensing beams.
    pub upsilon: f64,
    pub carrier_freq: f64,
    pub uav_array: ArrayGeometry,
    pub haps_array: ArrayGeometry,
    pub echo: EchoConfig,
    pub placement_seed: u64,
    /// Ground positions; when absent they are drawn uniformly in the arena.
    pub cu_positions: Option<Vec<[f64; 2]>>,
    pub target_positions: Option<Vec<[f64; 2]>>,
    /// Starting (or fixed) horizontal UAV positions. Default: box center.
    pub uav_positions: Option<Vec<[f64; 2]>>,
    /// Keep UAVs at `uav_positions` instead of optimizing them.
    pub fix_uav_positions: bool,
    /// Allowed horizontal UAV region. Default: the whole arena.
    pub position_box: Option<PositionBox>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            arena: 1000.0,
            num_uavs: 1,
            num_cus: 4,
            num_targets: 4,
            uav_altitude: 40.0,
            haps_altitude: 20_000.0,
            haps_xy: None,
            beta0_db: -30.0,
            p_max_dbm: 37.0,
            noise_power_dbm: -110.0,
            haps_noise_power_dbm: -110.0,
            gamma_th: 1e-5,
            sinr_th_db: 0.0,
            upsilon: 0.5,
            carrier_freq: 120e9,
            uav_array: ArrayGeometry::half_wave(4, 4),
            haps_array: ArrayGeometry::half_wave(20, 20),
            echo: EchoConfig::default(),
            placement_seed: 1,
            cu_positions: None,
            target_positions: None,
            uav_positions: None,
            fix_uav_positions: false,
            position_box: None,
        }
    }
}

/// CUs and targets served by one UAV.
#[derive(Debug, Clone, PartialEq)]
pub struct UavAssignment {
    pub cus: Vec<Position3>,
    pub targets: Vec<Position3>,
    /// RCS per target, m^2.
    pub rcs: Vec<f64>,
    /// Fixed reflection amplitudes, if configured.
    pub reflection_amp: Option<Vec<f64>>,
}

/// Fully resolved scenario in linear SI units.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub arena: f64,
    pub uav_altitude: f64,
    pub haps: Position3,
    pub beta0: f64,
    pub p_max: f64,
    pub noise_power: f64,
    pub haps_noise_power: f64,
    pub gamma_th: f64,
    pub sinr_th: f64,
    pub upsilon: f64,
    pub carrier_freq: f64,
    pub uav_array: ArrayGeometry,
    pub haps_array: ArrayGeometry,
    pub uavs: Vec<UavAssignment>,
    pub initial_uav_xy: Vec<[f64; 2]>,
    pub fix_uav_positions: bool,
    pub position_box: PositionBox,
    /// The config this scenario was resolved from, with positions filled in.
    pub config: ScenarioConfig,
}

fn draw_points(rng: &mut ChaCha8Rng, n: usize, arena: f64) -> Vec<[f64; 2]> {
    (0..n)
        .map(|_| [rng.random::<f64>() * arena, rng.random::<f64>() * arena])
        .collect()
}

// Separate streams so that the first K CUs do not depend on J and vice versa.
const CU_STREAM: u64 = 1;
const TARGET_STREAM: u64 = 2;
/// Extra CUs for UAV `m` come from stream `EXTRA_CU_STREAM + m`.
const EXTRA_CU_STREAM: u64 = 16;

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| {
            IsacError::Config(format!(
                "line {} column {}: {}",
                e.line(),
                e.column(),
                e
            ))
        })
    }

    pub fn haps_xy(&self) -> [f64; 2] {
        self.haps_xy
            .unwrap_or([0.5 * self.arena, 0.5 * self.arena])
    }

    fn check(&self) -> Result<()> {
        let err = |m: String| Err(IsacError::Config(m));
        if !(self.arena > 0.0) {
            return err(format!("arena must be positive, got {}", self.arena));
        }
        if self.num_uavs == 0 {
            return err("at least one UAV is required".into());
        }
        if !(self.uav_altitude > 0.0) {
            return err(format!("uav_altitude must be positive, got {}", self.uav_altitude));
        }
        if !(self.haps_altitude > self.uav_altitude) {
            return err("haps_altitude must exceed uav_altitude".into());
        }
        if !(self.carrier_freq > 0.0) {
            return err("carrier_freq must be positive".into());
        }
        if !(self.gamma_th >= 0.0) {
            return err(format!("gamma_th must be non-negative, got {}", self.gamma_th));
        }
        if !(0.0..=1.0).contains(&self.upsilon) {
            return err(format!("upsilon must lie in [0, 1], got {}", self.upsilon));
        }
        for v in [
            self.beta0_db,
            self.p_max_dbm,
            self.noise_power_dbm,
            self.haps_noise_power_dbm,
            self.sinr_th_db,
        ] {
            if !v.is_finite() {
                return err("power and gain fields must be finite".into());
            }
        }
        self.uav_array.validate()?;
        self.haps_array.validate()?;
        Ok(())
    }

    fn check_points(&self, what: &str, pts: &[[f64; 2]], expected: usize) -> Result<()> {
        if pts.len() != expected {
            return Err(IsacError::Config(format!(
                "{what}: expected {expected} positions, got {}",
                pts.len()
            )));
        }
        for (i, p) in pts.iter().enumerate() {
            let inside = p.iter().all(|c| c.is_finite() && *c >= 0.0 && *c <= self.arena);
            if !inside {
                return Err(IsacError::Config(format!(
                    "{what}[{i}] = ({}, {}) lies outside the {} m arena",
                    p[0], p[1], self.arena
                )));
            }
        }
        Ok(())
    }

    /// Fill in random placements and validate, returning a config whose
    /// positions are all explicit.
    pub fn generate(&self) -> Result<ScenarioConfig> {
        self.check()?;
        let mut out = self.clone();
        let n_cu = self.num_uavs * self.num_cus;
        let n_tg = self.num_uavs * self.num_targets;
        let cus = match &self.cu_positions {
            Some(p) => p.clone(),
            None => draw_points(&mut stream_rng(self.placement_seed, CU_STREAM), n_cu, self.arena),
        };
        let tgs = match &self.target_positions {
            Some(p) => p.clone(),
            None => draw_points(
                &mut stream_rng(self.placement_seed, TARGET_STREAM),
                n_tg,
                self.arena,
            ),
        };
        self.check_points("cu_positions", &cus, n_cu)?;
        self.check_points("target_positions", &tgs, n_tg)?;
        let bx = self.position_box.unwrap_or(PositionBox {
            min: [0.0, 0.0],
            max: [self.arena, self.arena],
        });
        if !(0..2).all(|i| bx.min[i] <= bx.max[i]) {
            return Err(IsacError::Config("position_box min exceeds max".into()));
        }
        let uav_xy = match &self.uav_positions {
            Some(p) => p.clone(),
            None => vec![bx.center(); self.num_uavs],
        };
        if uav_xy.len() != self.num_uavs {
            return Err(IsacError::Config(format!(
                "uav_positions: expected {} positions, got {}",
                self.num_uavs,
                uav_xy.len()
            )));
        }
        if let Some(i) = uav_xy.iter().position(|&q| !bx.contains(q)) {
            return Err(IsacError::Config(format!(
                "uav_positions[{i}] lies outside position_box"
            )));
        }
        if let Some(r) = &self.echo.rcs {
            if r.len() != n_tg || r.iter().any(|&x| !(x >= 0.0)) {
                return Err(IsacError::Config(format!(
                    "echo.rcs: expected {n_tg} non-negative values"
                )));
            }
        }
        if let Some(e) = &self.echo.reflection_amp {
            if e.len() != n_tg || e.iter().any(|&x| !(x >= 0.0)) {
                return Err(IsacError::Config(format!(
                    "echo.reflection_amp: expected {n_tg} non-negative values"
                )));
            }
        }
        out.cu_positions = Some(cus);
        out.target_positions = Some(tgs);
        out.uav_positions = Some(uav_xy);
        out.position_box = Some(bx);
        out.haps_xy = Some(self.haps_xy());
        Ok(out)
    }

    /// Generated config with `k` CUs per UAV. Sets are nested: the CUs for
    /// `k` are the first `k` of those for any larger count. UAV `m` keeps
    /// its current CUs; CU `i` beyond them is point `i` of the UAV's own
    /// extra stream.
    pub fn with_num_cus(&self, k: usize) -> Result<ScenarioConfig> {
        let cfg = self.generate()?;
        let cus = cfg.cu_positions.as_ref().expect("generated");
        let old = cfg.num_cus;
        let mut out = Vec::with_capacity(cfg.num_uavs * k);
        for m in 0..cfg.num_uavs {
            let block = &cus[m * old..(m + 1) * old];
            out.extend_from_slice(&block[..k.min(old)]);
            if k > old {
                let mut rng = stream_rng(cfg.placement_seed, EXTRA_CU_STREAM + m as u64);
                out.extend_from_slice(&draw_points(&mut rng, k, cfg.arena)[old..]);
            }
        }
        let mut next = cfg;
        next.num_cus = k;
        next.cu_positions = Some(out);
        next.generate()
    }

    /// Generate placements and convert everything to linear units.
    pub fn resolve(&self) -> Result<Scenario> {
        let cfg = self.generate()?;
        let cus = cfg.cu_positions.as_ref().expect("generated");
        let tgs = cfg.target_positions.as_ref().expect("generated");
        let rcs_all = cfg
            .echo
            .rcs
            .clone()
            .unwrap_or_else(|| vec![1.0; tgs.len()]);
        let uavs = (0..cfg.num_uavs)
            .map(|m| {
                let cu_range = m * cfg.num_cus..(m + 1) * cfg.num_cus;
                let tg_range = m * cfg.num_targets..(m + 1) * cfg.num_targets;
                UavAssignment {
                    cus: cus[cu_range]
                        .iter()
                        .map(|p| Position3::ground(p[0], p[1]))
                        .collect(),
                    targets: tgs[tg_range.clone()]
                        .iter()
                        .map(|p| Position3::ground(p[0], p[1]))
                        .collect(),
                    rcs: rcs_all[tg_range.clone()].to_vec(),
                    reflection_amp: cfg
                        .echo
                        .reflection_amp
                        .as_ref()
                        .map(|e| e[tg_range].to_vec()),
                }
            })
            .collect();
        let haps_xy = cfg.haps_xy();
        Ok(Scenario {
            arena: cfg.arena,
            uav_altitude: cfg.uav_altitude,
            haps: Position3::new(haps_xy[0], haps_xy[1], cfg.haps_altitude),
            beta0: db_to_linear(cfg.beta0_db),
            p_max: dbm_to_watts(cfg.p_max_dbm),
            noise_power: dbm_to_watts(cfg.noise_power_dbm),
            haps_noise_power: dbm_to_watts(cfg.haps_noise_power_dbm),
            gamma_th: cfg.gamma_th,
            sinr_th: db_to_linear(cfg.sinr_th_db),
            upsilon: cfg.upsilon,
            carrier_freq: cfg.carrier_freq,
            uav_array: cfg.uav_array,
            haps_array: cfg.haps_array,
            initial_uav_xy: cfg.uav_positions.clone().expect("generated"),
            fix_uav_positions: cfg.fix_uav_positions,
            position_box: cfg.position_box.expect("generated"),
            uavs,
            config: cfg,
        })
    }
}

impl Scenario {
    pub fn num_uavs(&self) -> usize {
        self.uavs.len()
    }

    pub fn num_cus(&self) -> usize {
        self.config.num_cus
    }

    pub fn num_targets(&self) -> usize {
        self.config.num_targets
    }

    pub fn elements(&self) -> usize {
        self.uav_array.len()
    }

    pub fn uav_position(&self, xy: [f64; 2]) -> Position3 {
        Position3::new(xy[0], xy[1], self.uav_altitude)
    }

    /// Reflection amplitudes of UAV `m`'s targets with the UAV at `uav`.
    pub fn echo_model(&self, m: usize, uav: Position3) -> EchoModel {
        let a = &self.uavs[m];
        match &a.reflection_amp {
            Some(e) => EchoModel {
                reflection_amp: e.clone(),
            },
            None => {
                let d: Vec<f64> = a
                    .targets
                    .iter()
                    .map(|&t| geometry::distance(uav, t))
                    .collect();
                EchoModel::from_rcs(self.beta0, &a.rcs, &d)
            }
        }
    }

    /// A copy with a different scalar setting, re-resolved from config.
    pub fn with_config(&self, f: impl FnOnce(&mut ScenarioConfig)) -> Result<Scenario> {
        let mut cfg = self.config.clone();
        f(&mut cfg);
        cfg.resolve()
    }
}
