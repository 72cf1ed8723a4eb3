//! Experiment drivers, result envelopes and CSV output.
//!
//! Sweeps that move along a nested family of feasible sets are solved in
//! the direction in which the set grows, and each point is seeded with the
//! previous point's design. With elitism this makes the reported optimum
//! monotone along the sweep regardless of GA noise.

use std::fmt;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{IsacError, Result};
use crate::opt::design::{DesignPoint, Norms, Objective, ProblemMode};
use crate::opt::ga::GaConfig;
use crate::opt::pareto::{normalize_objectives, pareto_sweep};
use crate::opt::solve::{ga_solve_best_of, provisional_norms, SolveRequest, SolveResult};
use crate::opt::trajectory::{solve_trajectory, TrajectorySettings};
use crate::scenario::{linear_to_db, Scenario, ScenarioConfig};

/// Environment variable capping the worker threads of a run.
pub const THREADS_ENV: &str = "ISAC_SIM_THREADS";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSettings {
    /// Problem solved by `solve` and `trajectory`.
    pub mode: ProblemMode,
    /// Weight for `solve`, `trajectory` and the proposed mode of the K sweep.
    pub mu: f64,
    /// Independent GA seeds per sweep point; the best feasible run is kept.
    pub seeds_per_point: usize,
    pub mu_list: Vec<f64>,
    pub pmax_dbm: Vec<f64>,
    pub gamma_th: Vec<f64>,
    pub k_list: Vec<usize>,
    pub trajectory: TrajectorySettings,
}

impl Default for SweepSettings {
    fn default() -> Self {
        Self {
            mode: ProblemMode::Multi,
            mu: 0.5,
            seeds_per_point: 3,
            mu_list: (1..=9).map(|i| i as f64 / 10.0).collect(),
            pmax_dbm: (30..=40).map(f64::from).collect(),
            gamma_th: vec![1e-6, 3e-6, 1e-5, 3e-5, 1e-4],
            k_list: vec![2, 3, 4, 5, 6],
            trajectory: TrajectorySettings::default(),
        }
    }
}

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: ScenarioConfig,
    pub ga: GaConfig,
    pub sweep: SweepSettings,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| {
            IsacError::Config(format!("line {} column {}: {}", e.line(), e.column(), e))
        })
    }

    /// Accepts either a run config or a result envelope, in which case its
    /// config echo is used.
    pub fn from_json_or_envelope(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text).map_err(|e| {
            IsacError::Config(format!("line {} column {}: {}", e.line(), e.column(), e))
        })?;
        match value.get("config_echo") {
            Some(echo) => serde_json::from_value(echo.clone())
                .map_err(|e| IsacError::Config(format!("config_echo: {e}"))),
            None => Self::from_json(text),
        }
    }

    /// Copy with the scenario's random placements made explicit.
    pub fn resolved(&self) -> Result<Self> {
        self.validate()?;
        Ok(Self {
            scenario: self.scenario.generate()?,
            ..self.clone()
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.ga.validate()?;
        let s = &self.sweep;
        if !(0.0..=1.0).contains(&s.mu) {
            return Err(IsacError::Config(format!("sweep.mu must lie in [0, 1], got {}", s.mu)));
        }
        if s.seeds_per_point == 0 {
            return Err(IsacError::Config("sweep.seeds_per_point must be at least 1".into()));
        }
        if s.gamma_th.iter().any(|g| !(*g >= 0.0 && g.is_finite())) {
            return Err(IsacError::Config("sweep.gamma_th values must be finite and >= 0".into()));
        }
        if s.pmax_dbm.iter().any(|p| !p.is_finite()) {
            return Err(IsacError::Config("sweep.pmax_dbm values must be finite".into()));
        }
        Ok(())
    }

    fn seeds(&self) -> Vec<u64> {
        (0..self.sweep.seeds_per_point as u64)
            .map(|s| self.ga.seed.wrapping_add(s))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Pareto,
    PmaxSweep,
    GammaSweep,
    KSweep,
    Single,
    Trajectory,
    Validate,
}

impl ExperimentKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentKind::Pareto => "pareto",
            ExperimentKind::PmaxSweep => "pmax-sweep",
            ExperimentKind::GammaSweep => "gamma-sweep",
            ExperimentKind::KSweep => "k-sweep",
            ExperimentKind::Single => "single",
            ExperimentKind::Trajectory => "trajectory",
            ExperimentKind::Validate => "validate",
        }
    }

    /// CSV header of this kind. Column order is part of the output format.
    pub fn columns(&self) -> &'static [&'static str] {
        match self {
            ExperimentKind::Pareto => &[
                "mu", "eta", "eta_db", "omega", "eta_norm", "omega_norm", "feasible",
            ],
            ExperimentKind::PmaxSweep => &[
                "p_max_dbm",
                "min_rate",
                "equal_split_rate",
                "rate_gap",
                "min_sinr",
                "feasible",
            ],
            ExperimentKind::GammaSweep => &["gamma_th", "min_sinr", "min_sinr_db", "min_rate", "feasible"],
            ExperimentKind::KSweep => &["k", "mode", "min_rate", "min_sinr", "feasible"],
            ExperimentKind::Single => &[
                "uav",
                "x",
                "y",
                "comm_power",
                "sense_power",
                "eta",
                "omega",
                "min_rate",
                "fitness",
                "feasible",
            ],
            ExperimentKind::Trajectory => &[
                "slot", "uav", "x", "y", "step", "eta", "omega", "min_rate", "feasible",
            ],
            ExperimentKind::Validate => &[
                "check",
                "instance",
                "reference",
                "measured",
                "rel_error",
                "tolerance",
                "passed",
            ],
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One CSV field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Bool(bool),
    Int(i64),
    Num(f64),
    Text(String),
    /// Undefined value, e.g. the dB value of zero. Empty in CSV, null in JSON.
    Missing,
}

impl Cell {
    fn num(x: f64) -> Cell {
        if x.is_finite() {
            Cell::Num(x)
        } else {
            Cell::Missing
        }
    }

    fn db(x: f64) -> Cell {
        if x > 0.0 {
            Cell::num(linear_to_db(x))
        } else {
            Cell::Missing
        }
    }

    fn int(x: usize) -> Cell {
        Cell::Int(x as i64)
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Num(x) => Some(*x),
            Cell::Int(i) => Some(*i as f64),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Cell::Bool(b) => Some(*b),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Cell::Text(s) => Some(s),
            _ => None,
        }
    }

    fn to_field(&self) -> String {
        match self {
            Cell::Bool(b) => b.to_string(),
            Cell::Int(i) => i.to_string(),
            // Debug formatting is the shortest string that parses back to
            // the same f64, with an exponent for very large or small values.
            Cell::Num(x) => format!("{x:?}"),
            Cell::Text(s) => s.clone(),
            Cell::Missing => String::new(),
        }
    }
}

/// Result envelope written next to every CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub kind: ExperimentKind,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    /// Designs, normalization constants and other per-run data.
    pub details: serde_json::Value,
    /// Fully resolved configuration; rerunning it reproduces `rows`.
    pub config_echo: RunConfig,
    pub seeds: Vec<u64>,
    pub wall_time: f64,
}

impl ExperimentResult {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn column(&self, name: &str) -> Option<Vec<&Cell>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| &r[i]).collect())
    }

    /// Numeric column; non-numeric cells become NaN.
    pub fn column_f64(&self, name: &str) -> Option<Vec<f64>> {
        Some(
            self.column(name)?
                .into_iter()
                .map(|c| c.as_f64().unwrap_or(f64::NAN))
                .collect(),
        )
    }

    /// Whether every row that has a `feasible` column reports true.
    pub fn all_feasible(&self) -> bool {
        self.column("feasible")
            .map(|c| c.iter().all(|x| x.as_bool() == Some(true)))
            .unwrap_or(true)
    }

    /// Whether every row that has a `passed` column reports true.
    pub fn all_passed(&self) -> bool {
        self.column("passed")
            .map(|c| c.iter().all(|x| x.as_bool() == Some(true)))
            .unwrap_or(true)
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::to_field))?;
        }
        w.into_inner()
            .map_err(|e| IsacError::Io(std::io::Error::other(e.to_string())))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Write `<kind>.csv` and `<kind>.json` into `dir`, creating it if needed.
    pub fn write_to(&self, dir: &Path) -> Result<(PathBuf, PathBuf)> {
        std::fs::create_dir_all(dir)?;
        let csv_path = dir.join(format!("{}.csv", self.kind));
        let json_path = dir.join(format!("{}.json", self.kind));
        std::fs::write(&csv_path, self.to_csv()?)?;
        std::fs::write(&json_path, self.to_json()?)?;
        Ok((csv_path, json_path))
    }
}

struct Builder {
    kind: ExperimentKind,
    rows: Vec<Vec<Cell>>,
    start: Instant,
}

impl Builder {
    fn new(kind: ExperimentKind) -> Self {
        Self {
            kind,
            rows: Vec::new(),
            start: Instant::now(),
        }
    }

    fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.kind.columns().len());
        self.rows.push(row);
    }

    fn finish(self, run: &RunConfig, seeds: Vec<u64>, details: serde_json::Value) -> ExperimentResult {
        ExperimentResult {
            kind: self.kind,
            columns: self.kind.columns().iter().map(|c| c.to_string()).collect(),
            rows: self.rows,
            details,
            config_echo: run.clone(),
            seeds,
            wall_time: self.start.elapsed().as_secs_f64(),
        }
    }
}

/// Run `f` on a pool capped by `ISAC_SIM_THREADS` when that is set.
pub fn with_thread_limit<R: Send>(f: impl FnOnce() -> R + Send) -> Result<R> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => {
            let n: usize = v
                .trim()
                .parse()
                .ok()
                .filter(|&n| n > 0)
                .ok_or_else(|| IsacError::Config(format!("{THREADS_ENV} must be a positive integer, got '{v}'")))?;
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| IsacError::Config(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
        Err(_) => Ok(f()),
    }
}

fn to_value<T: Serialize>(x: &T) -> serde_json::Value {
    serde_json::to_value(x).expect("plain data serializes")
}

fn equal_split_at(scenario: &Scenario, design: &DesignPoint) -> DesignPoint {
    DesignPoint::equal_split(scenario, design.uav_xy.clone())
}

fn drop_cus(design: &DesignPoint, k: usize) -> DesignPoint {
    let mut d = design.clone();
    d.comm_power.iter_mut().for_each(|p| p.truncate(k));
    d
}

/// Pareto-weight sweep. Columns: mu, eta, eta_db, omega, eta_norm,
/// omega_norm, feasible.
pub fn run_pareto(run: &RunConfig) -> Result<ExperimentResult> {
    let run = run.resolved()?;
    let mut b = Builder::new(ExperimentKind::Pareto);
    let sc = run.scenario.resolve()?;
    let sweep = pareto_sweep(&sc, &run.sweep.mu_list, &run.ga, run.sweep.seeds_per_point)?;
    for r in &sweep.records {
        b.push(vec![
            Cell::num(r.mu),
            Cell::num(r.eta),
            Cell::db(r.eta),
            Cell::num(r.omega),
            Cell::num(r.eta_norm),
            Cell::num(r.omega_norm),
            Cell::Bool(r.feasible),
        ]);
    }
    let details = json!({
        "norms": to_value(&sweep.normalization.norms),
        "designs": sweep.records.iter().map(|r| to_value(&r.design)).collect::<Vec<_>>(),
    });
    Ok(b.finish(&run, run.seeds(), details))
}

/// Max-min rate versus power budget, solved in increasing order of
/// `P_max`. The equal-split reference keeps the optimized UAV position and
/// splits `P_max` evenly over all beams.
pub fn run_pmax_sweep(run: &RunConfig) -> Result<ExperimentResult> {
    let run = run.resolved()?;
    if run.sweep.pmax_dbm.is_empty() {
        return Err(IsacError::InvalidArgument("pmax list is empty".into()));
    }
    let mut b = Builder::new(ExperimentKind::PmaxSweep);
    let base = run.scenario.resolve()?;
    let mut grid = run.sweep.pmax_dbm.clone();
    grid.sort_by(f64::total_cmp);

    let mut designs = Vec::new();
    let mut previous: Option<DesignPoint> = None;
    for &p in &grid {
        let sc = base.with_config(|c| c.p_max_dbm = p)?;
        let mut req = SolveRequest::new(&sc, ProblemMode::Comm, 0.0, provisional_norms(&sc));
        req.warm_start.extend(previous.clone());
        let r = ga_solve_best_of(&req, &run.ga, run.sweep.seeds_per_point)?;
        let eq = Objective::new(&sc, ProblemMode::Comm, 0.0, Norms::UNIT)
            .evaluate(&equal_split_at(&sc, &r.design))
            .values;
        b.push(vec![
            Cell::num(p),
            Cell::num(r.values.min_rate),
            Cell::num(eq.min_rate),
            Cell::num(r.values.min_rate - eq.min_rate),
            Cell::num(r.values.eta),
            Cell::Bool(r.feasible),
        ]);
        if r.feasible {
            previous = Some(r.design.clone());
        }
        designs.push(to_value(&r.design));
    }
    Ok(b.finish(&run, run.seeds(), json!({ "designs": designs })))
}

/// Max-min SINR versus beampattern threshold. Thresholds are solved from
/// the largest down; rows are written in increasing order.
pub fn run_gamma_sweep(run: &RunConfig) -> Result<ExperimentResult> {
    let run = run.resolved()?;
    if run.sweep.gamma_th.is_empty() {
        return Err(IsacError::InvalidArgument("gamma list is empty".into()));
    }
    let mut b = Builder::new(ExperimentKind::GammaSweep);
    let base = run.scenario.resolve()?;
    let mut grid = run.sweep.gamma_th.clone();
    grid.sort_by(|a, b| b.total_cmp(a));

    let mut solved: Vec<(f64, SolveResult)> = Vec::with_capacity(grid.len());
    let mut previous: Option<DesignPoint> = None;
    for &g in &grid {
        let sc = base.with_config(|c| c.gamma_th = g)?;
        let mut req = SolveRequest::new(&sc, ProblemMode::Comm, 0.0, provisional_norms(&sc));
        req.warm_start.extend(previous.clone());
        let r = ga_solve_best_of(&req, &run.ga, run.sweep.seeds_per_point)?;
        if r.feasible {
            previous = Some(r.design.clone());
        }
        solved.push((g, r));
    }
    solved.reverse();
    for (g, r) in &solved {
        b.push(vec![
            Cell::num(*g),
            Cell::num(r.values.eta),
            Cell::db(r.values.eta),
            Cell::num(r.values.min_rate),
            Cell::Bool(r.feasible),
        ]);
    }
    let designs: Vec<_> = solved.iter().map(|(_, r)| to_value(&r.design)).collect();
    Ok(b.finish(&run, run.seeds(), json!({ "designs": designs })))
}

/// Max-min rate versus number of CUs for the proposed network (scalarized
/// problem at `sweep.mu`) and the UAV-only baseline. CU sets are nested;
/// counts are solved from the largest down, each seeded with the next larger
/// count's design minus its last CU. Two rows per K, proposed first.
pub fn run_k_sweep_with_baseline(run: &RunConfig) -> Result<ExperimentResult> {
    let run = run.resolved()?;
    if run.sweep.k_list.is_empty() {
        return Err(IsacError::InvalidArgument("K list is empty".into()));
    }
    if run.sweep.k_list.contains(&0) {
        return Err(IsacError::InvalidArgument("K values must be at least 1".into()));
    }
    let mut b = Builder::new(ExperimentKind::KSweep);
    let mut ks = run.sweep.k_list.clone();
    ks.sort_unstable_by(|a, b| b.cmp(a));
    let seeds = run.sweep.seeds_per_point;

    let mut solved: Vec<(usize, SolveResult, SolveResult, Norms)> = Vec::new();
    let mut prev: Option<(DesignPoint, DesignPoint)> = None;
    for &k in &ks {
        let sc = run.scenario.with_num_cus(k)?.resolve()?;
        let norm = normalize_objectives(&sc, &run.ga, seeds)?;

        let mut proposed = SolveRequest::new(&sc, ProblemMode::Multi, run.sweep.mu, norm.norms);
        proposed.warm_start = vec![norm.comm.design.clone(), norm.sensing.design.clone()];
        let mut baseline = SolveRequest::new(&sc, ProblemMode::BaselineUavOnly, 0.0, norm.norms);
        baseline.warm_start = vec![norm.comm.design.clone()];
        if let Some((p, q)) = &prev {
            proposed.warm_start.push(drop_cus(p, k));
            baseline.warm_start.push(drop_cus(q, k));
        }
        let p = ga_solve_best_of(&proposed, &run.ga, seeds)?;
        let q = ga_solve_best_of(&baseline, &run.ga, seeds)?;
        prev = Some((p.design.clone(), q.design.clone()));
        solved.push((k, p, q, norm.norms));
    }
    solved.reverse();
    let mut details = Vec::new();
    for (k, p, q, norms) in &solved {
        for (label, r) in [("proposed", p), ("baseline-uav-only", q)] {
            b.push(vec![
                Cell::int(*k),
                Cell::Text(label.into()),
                Cell::num(r.values.min_rate),
                Cell::num(r.values.eta),
                Cell::Bool(r.feasible),
            ]);
        }
        details.push(json!({
            "k": k,
            "norms": to_value(norms),
            "proposed": to_value(&p.design),
            "baseline": to_value(&q.design),
        }));
    }
    Ok(b.finish(&run, run.seeds(), json!({ "points": details })))
}

fn normalized_request_seeds(
    run: &RunConfig,
    sc: &Scenario,
) -> Result<(Norms, Vec<DesignPoint>)> {
    let norm = normalize_objectives(sc, &run.ga, run.sweep.seeds_per_point)?;
    Ok((norm.norms, vec![norm.comm.design, norm.sensing.design]))
}

/// One solve of `sweep.mode` at `sweep.mu`, one row per UAV.
pub fn run_single(run: &RunConfig) -> Result<ExperimentResult> {
    let run = run.resolved()?;
    let mut b = Builder::new(ExperimentKind::Single);
    let sc = run.scenario.resolve()?;
    let (norms, warm) = normalized_request_seeds(&run, &sc)?;
    let mut req = SolveRequest::new(&sc, run.sweep.mode, run.sweep.mu, norms);
    req.warm_start = warm;
    let r = ga_solve_best_of(&req, &run.ga, run.sweep.seeds_per_point)?;
    for m in 0..sc.num_uavs() {
        let xy = r.design.uav_xy[m];
        b.push(vec![
            Cell::int(m),
            Cell::num(xy[0]),
            Cell::num(xy[1]),
            Cell::num(r.design.comm_power[m].iter().sum()),
            Cell::num(r.design.sense_power[m].iter().sum()),
            Cell::num(r.values.eta),
            Cell::num(r.values.omega),
            Cell::num(r.values.min_rate),
            Cell::num(r.values.fitness),
            Cell::Bool(r.feasible),
        ]);
    }
    let details = json!({ "norms": to_value(&norms), "result": to_value(&r) });
    Ok(b.finish(&run, run.seeds(), details))
}

/// Sequential per-slot placement under the speed limit in
/// `sweep.trajectory`.
pub fn run_trajectory(run: &RunConfig) -> Result<ExperimentResult> {
    let run = run.resolved()?;
    let mut b = Builder::new(ExperimentKind::Trajectory);
    let sc = run.scenario.resolve()?;
    let (norms, _) = normalized_request_seeds(&run, &sc)?;
    let t = &run.sweep.trajectory;
    let slots = solve_trajectory(&sc, t, run.sweep.mode, run.sweep.mu, norms, &run.ga)?;
    for (n, r) in slots.iter().enumerate() {
        for m in 0..sc.num_uavs() {
            let xy = r.design.uav_xy[m];
            let step = match n {
                0 => 0.0,
                _ => {
                    let p = slots[n - 1].design.uav_xy[m];
                    (xy[0] - p[0]).hypot(xy[1] - p[1])
                }
            };
            b.push(vec![
                Cell::int(n),
                Cell::int(m),
                Cell::num(xy[0]),
                Cell::num(xy[1]),
                Cell::num(step),
                Cell::num(r.values.eta),
                Cell::num(r.values.omega),
                Cell::num(r.values.min_rate),
                Cell::Bool(r.feasible),
            ]);
        }
    }
    let seeds = (0..t.slots as u64).map(|n| run.ga.seed.wrapping_add(n)).collect();
    let details = json!({
        "norms": to_value(&norms),
        "designs": slots.iter().map(|r| to_value(&r.design)).collect::<Vec<_>>(),
    });
    Ok(b.finish(&run, seeds, details))
}

/// Dispatch by kind.
pub fn run_experiment(kind: ExperimentKind, run: &RunConfig) -> Result<ExperimentResult> {
    with_thread_limit(|| match kind {
        ExperimentKind::Pareto => run_pareto(run),
        ExperimentKind::PmaxSweep => run_pmax_sweep(run),
        ExperimentKind::GammaSweep => run_gamma_sweep(run),
        ExperimentKind::KSweep => run_k_sweep_with_baseline(run),
        ExperimentKind::Single => run_single(run),
        ExperimentKind::Trajectory => run_trajectory(run),
        ExperimentKind::Validate => super::validate::run_validation(run),
    })?
}
