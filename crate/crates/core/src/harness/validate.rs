//! Cross-checks of the analytic model against closed forms, symbol-level
//! simulation and exhaustive search.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use super::experiments::{Cell, ExperimentKind, ExperimentResult, RunConfig};
use crate::error::Result;
use crate::geometry::{self, AngleOfDeparture, ArrayGeometry};
use crate::link::{self, BeamformerSet, EchoRelay, RelayGeometry, SymbolModel};
use crate::opt::design::{DesignPoint, Norms, Objective, ProblemMode};
use crate::opt::ga::GaConfig;
use crate::opt::oracle::{grid_oracle, OracleSettings};
use crate::opt::solve::{ga_solve, provisional_norms, SolveRequest};
use crate::scenario::{Scenario, ScenarioConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckRow {
    pub check: &'static str,
    pub instance: usize,
    pub reference: f64,
    pub measured: f64,
    pub rel_error: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl CheckRow {
    fn relative(check: &'static str, instance: usize, reference: f64, measured: f64, tolerance: f64) -> Self {
        let rel_error = rel(reference, measured);
        Self {
            check,
            instance,
            reference,
            measured,
            rel_error,
            tolerance,
            passed: rel_error <= tolerance,
        }
    }
}

fn rel(reference: f64, measured: f64) -> f64 {
    if reference == 0.0 {
        measured.abs()
    } else {
        ((measured - reference) / reference).abs()
    }
}

/// Random small scenario with a random design at a random UAV position.
pub fn random_instance(seed: u64, k: usize, j: usize) -> Result<(Scenario, DesignPoint)> {
    let sc = ScenarioConfig {
        num_cus: k,
        num_targets: j,
        placement_seed: seed,
        ..Default::default()
    }
    .resolve()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let xy = [rng.random::<f64>() * sc.arena, rng.random::<f64>() * sc.arena];
    let mut powers: Vec<f64> = (0..k + j).map(|_| rng.random::<f64>()).collect();
    let total: f64 = powers.iter().sum();
    powers.iter_mut().for_each(|p| *p *= sc.p_max / total.max(1e-300));
    let d = DesignPoint {
        uav_xy: vec![xy],
        comm_power: vec![powers[..k].to_vec()],
        sense_power: vec![powers[k..].to_vec()],
    };
    Ok((sc, d))
}

fn steering_checks(seed: u64, draws: usize) -> Vec<CheckRow> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut worst_norm, mut worst_gain) = ((0.0, 1.0, 1.0), (0.0, 1.0, 1.0));
    for _ in 0..draws {
        let geom = ArrayGeometry::new(
            rng.random_range(1..=12),
            rng.random_range(1..=12),
            rng.random_range(0.1..1.0),
        )
        .expect("valid geometry");
        let aod = AngleOfDeparture {
            theta: rng.random_range(0.0..std::f64::consts::FRAC_PI_2),
            phi: rng.random_range(-std::f64::consts::PI..std::f64::consts::PI),
        };
        let a = geometry::steering_vector(geom, aod);
        let g = a.len() as f64;
        let self_inner = a.inner(&a.entries).re;
        let e = rel(g, self_inner);
        if e >= worst_norm.0 {
            worst_norm = (e, g, self_inner);
        }
        let p: f64 = rng.random_range(0.01..10.0);
        let s = (p / g).sqrt();
        let bf = BeamformerSet {
            comm: vec![],
            sense: vec![a.entries.iter().map(|x| x * s).collect()],
        };
        let zeta = link::beampattern_gain_toward(&a.entries, &bf);
        let e = rel(p * g, zeta);
        if e >= worst_gain.0 {
            worst_gain = (e, p * g, zeta);
        }
    }
    vec![
        CheckRow::relative("steering-self-inner", 0, worst_norm.1, worst_norm.2, 1e-9),
        CheckRow::relative("matched-beampattern", 0, worst_gain.1, worst_gain.2, 1e-9),
    ]
}

/// Analytic SINR versus the symbol-level estimate: within 1% and within
/// three standard errors.
pub fn monte_carlo_sinr_check(instance: usize, seed: u64, k: usize, j: usize, symbols: usize) -> Result<CheckRow> {
    let (sc, d) = random_instance(seed, k, j)?;
    let obj = Objective::new(&sc, ProblemMode::Multi, 0.0, Norms::UNIT);
    let geo = &obj.geometry(&d)[0];
    let bf = geo.beamformers(&d.comm_power[0], &d.sense_power[0]);
    let cu = instance % k;
    let exact = link::sinr(cu, &geo.channels, &bf, sc.noise_power);
    let est = link::monte_carlo_sinr(
        cu,
        &geo.channels,
        &bf,
        sc.noise_power,
        symbols,
        seed,
        SymbolModel::CorrelatedInterference,
    );
    let mut row = CheckRow::relative("monte-carlo-sinr", instance, exact, est.sinr, 0.01);
    row.passed &= (est.sinr - exact).abs() <= 3.0 * est.std_error;
    Ok(row)
}

/// Echo power against `(G S delta)^2 G^2 sum eps_j^2 p'_j` for one UAV.
pub fn omega_closed_form_check(instance: usize, seed: u64) -> Result<CheckRow> {
    let (sc, d) = random_instance(seed, 2, 3)?;
    let obj = Objective::new(&sc, ProblemMode::Multi, 0.0, Norms::UNIT);
    let geo = &obj.geometry(&d)[0];
    let bf = geo.beamformers(&d.comm_power[0], &d.sense_power[0]);
    let g = sc.elements() as f64;
    let s = sc.haps_array.len() as f64;
    let sum: f64 = geo
        .echo
        .reflection_amp
        .iter()
        .zip(&d.sense_power[0])
        .map(|(e, p)| e * e * p)
        .sum();
    let closed = (g * s * geo.delta).powi(2) * g * g * sum;
    let computed = link::omega(&[EchoRelay {
        bf: &bf,
        echo: &geo.echo,
        haps_rx: &geo.haps_rx,
        delta: geo.delta,
        elements: sc.elements(),
    }]);
    Ok(CheckRow::relative("omega-closed-form", instance, closed, computed, 1e-9))
}

/// Echo power against the symbol-level relay simulation without HAPS noise.
pub fn monte_carlo_omega_check(instance: usize, seed: u64, symbols: usize) -> Result<CheckRow> {
    let (sc, d) = random_instance(seed, 1, 2)?;
    let obj = Objective::new(&sc, ProblemMode::Multi, 0.0, Norms::UNIT);
    let geo = &obj.geometry(&d)[0];
    let bf = geo.beamformers(&d.comm_power[0], &d.sense_power[0]);
    let hv = geometry::haps_phase_vectors(sc.uav_array, sc.haps_array, geo.position, sc.haps, sc.carrier_freq);
    let exact = link::omega(&[EchoRelay {
        bf: &bf,
        echo: &geo.echo,
        haps_rx: &geo.haps_rx,
        delta: geo.delta,
        elements: sc.elements(),
    }]);
    let est = link::monte_carlo_omega(
        &[RelayGeometry {
            bf: &bf,
            echo: &geo.echo,
            target_steering: &geo.target_steering,
            uav_tx: &hv.uav.entries,
            haps_rx: &geo.haps_rx,
            delta: geo.delta,
        }],
        0.0,
        symbols,
        seed,
    );
    let mut row = CheckRow::relative("monte-carlo-omega", instance, exact, est.omega, 0.01);
    row.passed &= (est.omega - exact).abs() <= 3.0 * est.std_error;
    Ok(row)
}

/// Scenario for the GA-versus-oracle comparison: two CUs, one target, UAV
/// held at a random position.
pub fn oracle_instance(seed: u64) -> Result<Scenario> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x0a11);
    ScenarioConfig {
        num_cus: 2,
        num_targets: 1,
        placement_seed: seed,
        uav_positions: Some(vec![[rng.random_range(200.0..800.0), rng.random_range(200.0..800.0)]]),
        fix_uav_positions: true,
        ..Default::default()
    }
    .resolve()
}

/// GA best fitness against exhaustive search on a `1/steps` power simplex.
/// Passes when the GA is no more than `tolerance` (relative) below the grid.
pub fn ga_vs_oracle_check(
    instance: usize,
    sc: &Scenario,
    mu: f64,
    ga: &GaConfig,
    steps: usize,
    tolerance: f64,
) -> Result<CheckRow> {
    let norms = provisional_norms(sc);
    let oracle = grid_oracle(
        sc,
        mu,
        ProblemMode::Multi,
        norms,
        &OracleSettings {
            steps,
            penalty_weight: ga.penalty_weight,
            ..Default::default()
        },
    )?;
    let r = ga_solve(&SolveRequest::new(sc, ProblemMode::Multi, mu, norms), ga)?;
    let (best, got) = (oracle.values.fitness, r.values.fitness);
    let shortfall = (best - got) / best.abs().max(f64::MIN_POSITIVE);
    Ok(CheckRow {
        check: "ga-vs-oracle",
        instance,
        reference: best,
        measured: got,
        rel_error: shortfall.max(0.0),
        tolerance,
        passed: shortfall <= tolerance && (r.feasible || !oracle.values.is_feasible(1e-6)),
    })
}

/// All cross-checks with the run's seed.
pub fn validation_rows(run: &RunConfig) -> Result<Vec<CheckRow>> {
    let seed = run.ga.seed;
    let mut rows = steering_checks(seed, 1000);
    for i in 0..3 {
        rows.push(monte_carlo_sinr_check(i, seed + i as u64, 2 + i % 2, 1 + i % 2, 1_000_000)?);
    }
    for i in 0..10 {
        rows.push(omega_closed_form_check(i, seed + 100 + i as u64)?);
    }
    rows.push(monte_carlo_omega_check(0, seed + 200, 200_000)?);
    let desk = GaConfig::desk().with_seed(seed);
    for i in 0..2 {
        let sc = oracle_instance(seed + 300 + i as u64)?;
        rows.push(ga_vs_oracle_check(i, &sc, 0.5, &desk, 200, 0.02)?);
    }
    Ok(rows)
}

pub fn run_validation(run: &RunConfig) -> Result<ExperimentResult> {
    let start = std::time::Instant::now();
    let run = run.resolved()?;
    let rows = validation_rows(&run)?;
    let all = rows.iter().all(|r| r.passed);
    Ok(ExperimentResult {
        kind: ExperimentKind::Validate,
        columns: ExperimentKind::Validate
            .columns()
            .iter()
            .map(|c| c.to_string())
            .collect(),
        rows: rows
            .iter()
            .map(|r| {
                vec![
                    Cell::Text(r.check.into()),
                    Cell::Int(r.instance as i64),
                    Cell::Num(r.reference),
                    Cell::Num(r.measured),
                    Cell::Num(r.rel_error),
                    Cell::Num(r.tolerance),
                    Cell::Bool(r.passed),
                ]
            })
            .collect(),
        details: json!({ "all_passed": all }),
        config_echo: run.clone(),
        seeds: vec![run.ga.seed],
        wall_time: start.elapsed().as_secs_f64(),
    })
}
