use haps_isac::opt::solve::{provisional_norms, solve_max_min_sinr};
use haps_isac::opt::{
    ga_solve, grid_oracle, solve_trajectory, GaConfig, OracleSettings, ProblemMode, SolveRequest,
    TrajectorySettings, FEASIBILITY_TOL,
};
use haps_isac::scenario::{Scenario, ScenarioConfig};

fn small() -> Scenario {
    ScenarioConfig {
        num_cus: 2,
        num_targets: 2,
        placement_seed: 9,
        ..Default::default()
    }
    .resolve()
    .unwrap()
}

fn quick(seed: u64) -> GaConfig {
    GaConfig {
        population: 60,
        generations: 60,
        ..GaConfig::desk().with_seed(seed)
    }
}

#[test]
fn reported_feasible_means_within_tolerance() {
    let sc = small();
    let norms = provisional_norms(&sc);
    for mode in [ProblemMode::Sensing, ProblemMode::Comm, ProblemMode::Multi, ProblemMode::BaselineUavOnly] {
        let r = ga_solve(&SolveRequest::new(&sc, mode, 0.5, norms), &quick(2)).unwrap();
        let worst = r.values.violations.iter().map(|v| v.magnitude).fold(0.0, f64::max);
        assert_eq!(r.feasible, worst <= FEASIBILITY_TOL, "{mode}: {worst}");
    }
}

#[test]
fn best_fitness_never_drops_and_runs_repeat() {
    let sc = small();
    let req = SolveRequest::new(&sc, ProblemMode::Multi, 0.3, provisional_norms(&sc));
    let a = ga_solve(&req, &quick(5)).unwrap();
    let b = ga_solve(&req, &quick(5)).unwrap();
    assert!(a.history.windows(2).all(|w| w[1] >= w[0]));
    assert_eq!(a.design, b.design);
    assert_eq!(a.values.fitness.to_bits(), b.values.fitness.to_bits());
}

#[test]
fn comm_solver_is_the_mu_zero_endpoint() {
    let sc = small();
    let cfg = quick(8);
    let direct = solve_max_min_sinr(&sc, &cfg).unwrap();
    let req = SolveRequest::new(&sc, ProblemMode::Comm, 0.0, provisional_norms(&sc));
    let via = ga_solve(&req, &cfg).unwrap();
    assert_eq!(direct.values.fitness.to_bits(), via.values.fitness.to_bits());
}

#[test]
fn symmetric_users_get_equal_power() {
    let sc = ScenarioConfig {
        num_cus: 2,
        num_targets: 0,
        cu_positions: Some(vec![[400.0, 500.0], [600.0, 500.0]]),
        target_positions: Some(vec![]),
        uav_positions: Some(vec![[500.0, 500.0]]),
        fix_uav_positions: true,
        ..Default::default()
    }
    .resolve()
    .unwrap();
    let o = grid_oracle(&sc, 0.0, ProblemMode::Comm, provisional_norms(&sc), &OracleSettings::default()).unwrap();
    let p = &o.design.comm_power[0];
    assert!((p[0] - p[1]).abs() <= sc.p_max / 200.0 + 1e-12, "{p:?}");
}

#[test]
fn trajectory_respects_speed_limit() {
    let sc = small();
    let norms = provisional_norms(&sc);
    let settings = TrajectorySettings { slots: 4, dt: 1.0, v_max: 15.0 };
    let slots = solve_trajectory(&sc, &settings, ProblemMode::Multi, 0.5, norms, &quick(3)).unwrap();
    for w in slots.windows(2) {
        let (a, b) = (w[0].design.uav_xy[0], w[1].design.uav_xy[0]);
        assert!((a[0] - b[0]).hypot(a[1] - b[1]) <= 15.0 + 1e-9);
    }
}

#[test]
fn frozen_uav_stays_put() {
    let sc = small();
    let norms = provisional_norms(&sc);
    let settings = TrajectorySettings { slots: 3, dt: 1.0, v_max: 0.0 };
    let slots = solve_trajectory(&sc, &settings, ProblemMode::Comm, 0.0, norms, &quick(3)).unwrap();
    for s in &slots[1..] {
        let (a, b) = (slots[0].design.uav_xy[0], s.design.uav_xy[0]);
        assert!((a[0] - b[0]).hypot(a[1] - b[1]) <= 1e-9);
    }
}

#[test]
fn loose_speed_limit_matches_independent_slots() {
    let sc = small();
    let norms = provisional_norms(&sc);
    let cfg = quick(11);
    let settings = TrajectorySettings { slots: 3, dt: 1.0, v_max: 1e6 };
    let slots = solve_trajectory(&sc, &settings, ProblemMode::Multi, 0.5, norms, &cfg).unwrap();
    for (n, s) in slots.iter().enumerate() {
        let req = SolveRequest::new(&sc, ProblemMode::Multi, 0.5, norms);
        let alone = ga_solve(&req, &cfg.with_seed(cfg.seed + n as u64)).unwrap();
        assert_eq!(s.design, alone.design, "slot {n}");
    }
}
