//! C ABI over the `haps-isac` simulator.
//!
//! Every function returns a [`HapsIsacStatus`] (or a plain value for the
//! pure helpers). On failure the message is kept per thread and can be
//! read with [`haps_isac_last_error`]. Strings handed out by the library
//! must be released with [`haps_isac_string_free`]; handles with their own
//! `_free` function. Passing NULL to any `_free` is a no-op.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use haps_isac::geometry::{self, AngleOfDeparture, ArrayGeometry};
use haps_isac::harness::{run_experiment, ExperimentKind, ExperimentResult, RunConfig};
use haps_isac::link;
use haps_isac::opt::{ga_solve, provisional_norms, GaConfig, ProblemMode, SolveRequest};
use haps_isac::scenario::{Scenario, ScenarioConfig};
use haps_isac::IsacError;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HapsIsacStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    Domain = 4,
    Infeasible = 5,
    TooLarge = 6,
    BufferTooSmall = 7,
    Io = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HapsIsacMode {
    Sensing = 0,
    Comm = 1,
    Multi = 2,
    BaselineUavOnly = 3,
}

impl From<HapsIsacMode> for ProblemMode {
    fn from(m: HapsIsacMode) -> Self {
        match m {
            HapsIsacMode::Sensing => ProblemMode::Sensing,
            HapsIsacMode::Comm => ProblemMode::Comm,
            HapsIsacMode::Multi => ProblemMode::Multi,
            HapsIsacMode::BaselineUavOnly => ProblemMode::BaselineUavOnly,
        }
    }
}

/// Objective values of a solved design.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct HapsIsacObjective {
    /// Minimum CU SINR, linear.
    pub eta: f64,
    /// Echo power at the HAPS, W.
    pub omega: f64,
    /// Minimum rate, bits/s/Hz.
    pub min_rate: f64,
    pub fitness: f64,
    pub max_violation: f64,
    pub feasible: bool,
}

/// Resolved scenario with all placements explicit.
pub struct HapsIsacScenario {
    config: ScenarioConfig,
    scenario: Scenario,
}

/// Output of one experiment run.
pub struct HapsIsacResult {
    inner: ExperimentResult,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let mut s = msg.into();
    s.retain(|c| c != '\0');
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(s).unwrap_or_default());
}

fn status_of(e: &IsacError) -> HapsIsacStatus {
    match e {
        IsacError::Config(_) | IsacError::Json(_) => HapsIsacStatus::Config,
        IsacError::InvalidArgument(_) => HapsIsacStatus::InvalidArgument,
        IsacError::Domain(_) => HapsIsacStatus::Domain,
        IsacError::Infeasible(_) => HapsIsacStatus::Infeasible,
        IsacError::TooLarge(_) => HapsIsacStatus::TooLarge,
        IsacError::Csv(_) | IsacError::Io(_) => HapsIsacStatus::Io,
    }
}

struct Fail(HapsIsacStatus, String);

impl From<IsacError> for Fail {
    fn from(e: IsacError) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn fail<T>(status: HapsIsacStatus, msg: impl Into<String>) -> Result<T, Fail> {
    Err(Fail(status, msg.into()))
}

/// Run `f`, converting errors and panics to a status code.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> HapsIsacStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            HapsIsacStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            HapsIsacStatus::Panic
        }
    }
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return fail(HapsIsacStatus::NullPointer, format!("{what} is NULL"));
    }
    CStr::from_ptr(p)
        .to_str()
        .or_else(|_| fail(HapsIsacStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn out_ref<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut()
        .ok_or_else(|| Fail(HapsIsacStatus::NullPointer, format!("{what} is NULL")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref()
        .ok_or_else(|| Fail(HapsIsacStatus::NullPointer, format!("{what} is NULL")))
}

fn to_c_string(s: String) -> Result<*mut c_char, Fail> {
    CString::new(s)
        .map(CString::into_raw)
        .or_else(|_| fail(HapsIsacStatus::Io, "output contains a NUL byte"))
}

fn parse_kind(name: &str) -> Result<ExperimentKind, Fail> {
    const KINDS: [ExperimentKind; 7] = [
        ExperimentKind::Pareto,
        ExperimentKind::PmaxSweep,
        ExperimentKind::GammaSweep,
        ExperimentKind::KSweep,
        ExperimentKind::Single,
        ExperimentKind::Trajectory,
        ExperimentKind::Validate,
    ];
    KINDS
        .into_iter()
        .find(|k| k.as_str() == name)
        .ok_or_else(|| Fail(HapsIsacStatus::InvalidArgument, format!("unknown experiment kind '{name}'")))
}

fn new_scenario(cfg: ScenarioConfig) -> Result<Box<HapsIsacScenario>, Fail> {
    let config = cfg.generate()?;
    let scenario = config.resolve()?;
    Ok(Box::new(HapsIsacScenario { config, scenario }))
}

/// Message of the last failed call on this thread, or an empty string.
/// The pointer stays valid until the next library call on this thread.
#[no_mangle]
pub extern "C" fn haps_isac_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn haps_isac_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Release a string returned by this library.
///
/// # Safety
/// `s` must be NULL or a pointer obtained from this library that has not
/// been freed yet.
#[no_mangle]
pub unsafe extern "C" fn haps_isac_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Shannon rate `log2(1 + sinr)`.
#[no_mangle]
pub extern "C" fn haps_isac_rate(sinr: f64) -> f64 {
    link::achievable_rate(sinr)
}

/// Build a scenario with default parameters.
///
/// # Safety
/// `out` must be a valid pointer to writable storage.
#[no_mangle]
pub unsafe extern "C" fn haps_isac_scenario_default(out: *mut *mut HapsIsacScenario) -> HapsIsacStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        *out = Box::into_raw(new_scenario(ScenarioConfig::default())?);
        Ok(())
    })
}

/// Build a scenario from a JSON scenario config. Missing placements are
/// drawn from the config's placement seed.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn haps_isac_scenario_from_json(
    json: *const c_char,
    out: *mut *mut HapsIsacScenario,
) -> HapsIsacStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        let cfg = ScenarioConfig::from_json(read_str(json, "json")?)?;
        *out = Box::into_raw(new_scenario(cfg)?);
        Ok(())
    })
}

/// # Safety
/// `sc` must be NULL or a handle from this library not freed yet.
#[no_mangle]
pub unsafe extern "C" fn haps_isac_scenario_free(sc: *mut HapsIsacScenario) {
    if !sc.is_null() {
        drop(Box::from_raw(sc));
    }
}

/// Number of UAVs, CUs per UAV and targets per UAV. Any output pointer may
/// be NULL.
///
/// # Safety
/// `sc` must be a live handle; non-NULL outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn haps_isac_scenario_counts(
    sc: *const HapsIsacScenario,
    uavs: *mut usize,
    cus: *mut usize,
    targets: *mut usize,
) -> HapsIsacStatus {
    guard(|| {
        let sc = &handle(sc, "scenario")?.scenario;
        if let Some(u) = uavs.as_mut() {
            *u = sc.num_uavs();
        }
        if let Some(c) = cus.as_mut() {
            *c = sc.num_cus();
        }
        if let Some(t) = targets.as_mut() {
            *t = sc.num_targets();
        }
        Ok(())
    })
}

/// Resolved scenario config as JSON. Free with [`haps_isac_string_free`].
///
/// # Safety
/// `sc` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn haps_isac_scenario_to_json(
    sc: *const HapsIsacScenario,
    out: *mut *mut c_char,
) -> HapsIsacStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        let sc = handle(sc, "scenario")?;
        let text = serde_json::to_string_pretty(&sc.config).map_err(IsacError::from)?;
        *out = to_c_string(text)?;
        Ok(())
    })
}

/// Solve one instance with the desk GA preset and the given seed. The
/// weighted objectives are scaled by the equal-split reference design.
///
/// # Safety
/// `sc` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn haps_isac_solve(
    sc: *const HapsIsacScenario,
    mode: HapsIsacMode,
    mu: f64,
    seed: u64,
    out: *mut HapsIsacObjective,
) -> HapsIsacStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = HapsIsacObjective::default();
        let sc = &handle(sc, "scenario")?.scenario;
        if !(0.0..=1.0).contains(&mu) {
            return fail(HapsIsacStatus::InvalidArgument, format!("mu must lie in [0, 1], got {mu}"));
        }
        let req = SolveRequest::new(sc, mode.into(), mu, provisional_norms(sc));
        let r = ga_solve(&req, &GaConfig::desk().with_seed(seed))?;
        *out = HapsIsacObjective {
            eta: r.values.eta,
            omega: r.values.omega,
            min_rate: r.values.min_rate,
            fitness: r.values.fitness,
            max_violation: r.values.max_violation(),
            feasible: r.feasible,
        };
        Ok(())
    })
}

/// Write the steering vector of a `rows x cols` array toward `(theta, phi)`
/// into `re` and `im`, each of length `len >= rows * cols`.
///
/// # Safety
/// `re` and `im` must point to at least `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn haps_isac_steering_vector(
    rows: usize,
    cols: usize,
    spacing_over_lambda: f64,
    theta: f64,
    phi: f64,
    re: *mut f64,
    im: *mut f64,
    len: usize,
) -> HapsIsacStatus {
    guard(|| {
        if re.is_null() || im.is_null() {
            return fail(HapsIsacStatus::NullPointer, "output buffer is NULL");
        }
        let geom = ArrayGeometry::new(rows, cols, spacing_over_lambda)?;
        if len < geom.len() {
            return fail(
                HapsIsacStatus::BufferTooSmall,
                format!("need {} entries, got {len}", geom.len()),
            );
        }
        if !(theta.is_finite() && phi.is_finite()) {
            return fail(HapsIsacStatus::InvalidArgument, "angles must be finite");
        }
        let a = geometry::steering_vector(geom, AngleOfDeparture { theta, phi });
        let re = std::slice::from_raw_parts_mut(re, a.len());
        let im = std::slice::from_raw_parts_mut(im, a.len());
        for (i, z) in a.entries.iter().enumerate() {
            re[i] = z.re;
            im[i] = z.im;
        }
        Ok(())
    })
}

/// Run an experiment by kind name (`pareto`, `pmax-sweep`, `gamma-sweep`,
/// `k-sweep`, `single`, `trajectory`, `validate`). `config_json` is a run
/// config or a previous result envelope; NULL means defaults.
///
/// # Safety
/// String arguments must be NULL-terminated (or NULL where allowed);
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn haps_isac_run(
    kind: *const c_char,
    config_json: *const c_char,
    out: *mut *mut HapsIsacResult,
) -> HapsIsacStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        let kind = parse_kind(read_str(kind, "kind")?)?;
        let run = if config_json.is_null() {
            RunConfig::default()
        } else {
            RunConfig::from_json_or_envelope(read_str(config_json, "config_json")?)?
        };
        let inner = run_experiment(kind, &run)?;
        *out = Box::into_raw(Box::new(HapsIsacResult { inner }));
        Ok(())
    })
}

/// # Safety
/// `res` must be NULL or a handle from this library not freed yet.
#[no_mangle]
pub unsafe extern "C" fn haps_isac_result_free(res: *mut HapsIsacResult) {
    if !res.is_null() {
        drop(Box::from_raw(res));
    }
}

/// Number of data rows (0 for a NULL handle).
///
/// # Safety
/// `res` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn haps_isac_result_rows(res: *const HapsIsacResult) -> usize {
    res.as_ref().map_or(0, |r| r.inner.rows.len())
}

/// Result table as CSV. Free with [`haps_isac_string_free`].
///
/// # Safety
/// `res` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn haps_isac_result_csv(
    res: *const HapsIsacResult,
    out: *mut *mut c_char,
) -> HapsIsacStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        let bytes = handle(res, "result")?.inner.to_csv()?;
        let text = String::from_utf8(bytes).or_else(|_| fail(HapsIsacStatus::Io, "CSV is not UTF-8"))?;
        *out = to_c_string(text)?;
        Ok(())
    })
}

/// Full result envelope as JSON. Free with [`haps_isac_string_free`].
///
/// # Safety
/// `res` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn haps_isac_result_json(
    res: *const HapsIsacResult,
    out: *mut *mut c_char,
) -> HapsIsacStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        *out = to_c_string(handle(res, "result")?.inner.to_json()?)?;
        Ok(())
    })
}
