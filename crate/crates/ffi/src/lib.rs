//! C interface to the simulator.
//!
//! Objects are opaque handles created by `ds_*_new`/`ds_*_load` style
//! functions and released with the matching `ds_*_free`. Every fallible
//! call returns a [`DsStatus`]; on failure a description is available from
//! [`ds_last_error_message`] on the same thread. Strings returned through
//! `char **` out-parameters are owned by the caller and must be released
//! with [`ds_string_free`].
//!
//! Propositions are bitmasks: bit `k` stands for the `(k+1)`-th singleton,
//! so `0b101` is `{θ1, θ3}`. Agent indices are 0-based.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ds_consensus::dst::{
    jousselme_distance, validate, BodyOfEvidence, BoeJson, DstError, FrameOfDiscernment,
    Proposition,
};
use ds_consensus::harness::{
    emit_csv, epsilon_grid, load_scenario, run_simulation, run_sweep, verify_report, HarnessError,
    RunOptions, RunResult, Scenario, ScenarioConfig,
};

/// Result codes. Zero is success.
#[repr(C)]
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum DsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidUtf8 = 3,
    Parse = 4,
    InvalidScenario = 5,
    UnknownScenario = 6,
    EngineMismatch = 7,
    Dynamics = 8,
    Io = 9,
    Runtime = 10,
    Panic = 11,
}

/// A body of evidence.
pub struct DsBoe {
    inner: BodyOfEvidence,
}

/// A materialized scenario.
pub struct DsScenario {
    inner: Scenario,
}

/// The outcome of one simulation run.
pub struct DsRun {
    inner: RunResult,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(DsStatus, String);

impl From<DstError> for Failure {
    fn from(e: DstError) -> Self {
        Failure(DsStatus::InvalidArgument, e.to_string())
    }
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        let status = match &e {
            HarnessError::Parse { .. } => DsStatus::Parse,
            HarnessError::InvalidScenario { .. } | HarnessError::InvalidSweep(_) => {
                DsStatus::InvalidScenario
            }
            HarnessError::UnknownScenario(_) => DsStatus::UnknownScenario,
            HarnessError::EngineMismatch(_) => DsStatus::EngineMismatch,
            HarnessError::Dynamics(_) => DsStatus::Dynamics,
            HarnessError::Io { .. } => DsStatus::Io,
            HarnessError::Runtime(_) => DsStatus::Runtime,
        };
        Failure(status, e.to_string())
    }
}

fn set_error(message: String) {
    let text = CString::new(message.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(text));
}

/// Run `body`, translating failures and panics into status codes.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> DsStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            DsStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(panic) => {
            let message = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal error: {message}"));
            DsStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(DsStatus::NullPointer, format!("{what} is null"))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(DsStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

/// Handles only ever hold proper mass functions.
fn checked(boe: BodyOfEvidence) -> Result<BodyOfEvidence, Failure> {
    let report = validate(&boe);
    if report.valid {
        Ok(boe)
    } else {
        Err(Failure(
            DsStatus::InvalidArgument,
            format!(
                "not a mass function (total {}, m(∅) = 0: {}, non-negative: {})",
                report.total_mass, report.empty_set_zero, report.non_negative
            ),
        ))
    }
}

fn owned_string(s: String) -> *mut c_char {
    CString::new(s).expect("no interior nul").into_raw()
}

fn proposition(frame: &FrameOfDiscernment, bits: u32) -> Result<Proposition, Failure> {
    let p = Proposition(bits);
    if frame.contains(p) {
        Ok(p)
    } else {
        Err(DstError::PropositionOutOfFrame(bits).into())
    }
}

/// `NaN` selects the scenario's own bound of confidence.
fn epsilon_override(epsilon: f64) -> Option<f64> {
    (!epsilon.is_nan()).then_some(epsilon)
}

// ---- errors and strings ----

/// Description of the last failure on this thread, or null when the last
/// call succeeded. Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn ds_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Release a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn ds_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn ds_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

// ---- bodies of evidence ----

/// Build a body of evidence from `len = 2^frame_size` masses indexed by
/// bitmask. The masses must be non-negative, sum to one and leave the
/// empty set at zero.
///
/// # Safety
/// `masses` must point to `len` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ds_boe_new(
    frame_size: usize,
    masses: *const f64,
    len: usize,
    out_boe: *mut *mut DsBoe,
) -> DsStatus {
    guard(|| {
        let slot = out(out_boe, "out")?;
        *slot = ptr::null_mut();
        if masses.is_null() {
            return Err(null("masses"));
        }
        let frame = FrameOfDiscernment::new(frame_size)?;
        let values = std::slice::from_raw_parts(masses, len).to_vec();
        let inner = checked(BodyOfEvidence::from_masses(frame, values)?)?;
        *slot = Box::into_raw(Box::new(DsBoe { inner }));
        Ok(())
    })
}

/// Parse `{"frame_size": 3, "masses": {"1": 0.5, "*": 0.5}}`.
///
/// # Safety
/// `json` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ds_boe_from_json(
    json: *const c_char,
    out_boe: *mut *mut DsBoe,
) -> DsStatus {
    guard(|| {
        let slot = out(out_boe, "out")?;
        *slot = ptr::null_mut();
        let text = text(json, "json")?;
        let parsed: BoeJson =
            serde_json::from_str(text).map_err(|e| Failure(DsStatus::Parse, e.to_string()))?;
        let inner = checked(parsed.into_boe()?)?;
        *slot = Box::into_raw(Box::new(DsBoe { inner }));
        Ok(())
    })
}

/// # Safety
/// `boe` must come from this library and not have been freed. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn ds_boe_free(boe: *mut DsBoe) {
    if !boe.is_null() {
        drop(Box::from_raw(boe));
    }
}

/// # Safety
/// `boe` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ds_boe_frame_size(boe: *const DsBoe, out_size: *mut usize) -> DsStatus {
    guard(|| {
        *out(out_size, "out")? = deref(boe, "boe")?.inner.frame().size();
        Ok(())
    })
}

/// # Safety
/// `boe` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ds_boe_mass(boe: *const DsBoe, prop: u32, out_mass: *mut f64) -> DsStatus {
    guard(|| {
        let b = &deref(boe, "boe")?.inner;
        *out(out_mass, "out")? = b.mass(proposition(b.frame(), prop)?);
        Ok(())
    })
}

/// # Safety
/// `boe` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ds_boe_belief(
    boe: *const DsBoe,
    prop: u32,
    out_value: *mut f64,
) -> DsStatus {
    guard(|| {
        let b = &deref(boe, "boe")?.inner;
        *out(out_value, "out")? = b.belief(proposition(b.frame(), prop)?);
        Ok(())
    })
}

/// # Safety
/// `boe` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ds_boe_plausibility(
    boe: *const DsBoe,
    prop: u32,
    out_value: *mut f64,
) -> DsStatus {
    guard(|| {
        let b = &deref(boe, "boe")?.inner;
        *out(out_value, "out")? = b.plausibility(proposition(b.frame(), prop)?);
        Ok(())
    })
}

/// Fagin–Halpern conditional belief `Bl(b | a)`.
///
/// # Safety
/// `boe` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ds_boe_conditional_belief(
    boe: *const DsBoe,
    b: u32,
    a: u32,
    out_value: *mut f64,
) -> DsStatus {
    guard(|| {
        let boe = &deref(boe, "boe")?.inner;
        let (b, a) = (proposition(boe.frame(), b)?, proposition(boe.frame(), a)?);
        *out(out_value, "out")? = boe.belief_function().conditional_belief(b, a)?;
        Ok(())
    })
}

/// Jousselme distance between two bodies of evidence on the same frame.
///
/// # Safety
/// Both handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ds_boe_distance(
    a: *const DsBoe,
    b: *const DsBoe,
    out_value: *mut f64,
) -> DsStatus {
    guard(|| {
        let (a, b) = (&deref(a, "a")?.inner, &deref(b, "b")?.inner);
        *out(out_value, "out")? = jousselme_distance(a, b)?;
        Ok(())
    })
}

/// # Safety
/// `boe` must be a live handle; `out` must be writable. Free the result
/// with [`ds_string_free`].
#[no_mangle]
pub unsafe extern "C" fn ds_boe_to_json(boe: *const DsBoe, out_json: *mut *mut c_char) -> DsStatus {
    guard(|| {
        let slot = out(out_json, "out")?;
        *slot = ptr::null_mut();
        let json = BoeJson::from(&deref(boe, "boe")?.inner);
        *slot = owned_string(serde_json::to_string(&json).expect("serializable"));
        Ok(())
    })
}

// ---- scenarios ----

/// Load a scenario file or built-in asset by name.
///
/// # Safety
/// `name` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ds_scenario_load(
    name: *const c_char,
    out_scenario: *mut *mut DsScenario,
) -> DsStatus {
    guard(|| {
        let slot = out(out_scenario, "out")?;
        *slot = ptr::null_mut();
        let inner = load_scenario(text(name, "name")?)?;
        *slot = Box::into_raw(Box::new(DsScenario { inner }));
        Ok(())
    })
}

/// Build a scenario from JSON text. Relative graph files resolve against
/// the working directory.
///
/// # Safety
/// `json` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ds_scenario_from_json(
    json: *const c_char,
    out_scenario: *mut *mut DsScenario,
) -> DsStatus {
    guard(|| {
        let slot = out(out_scenario, "out")?;
        *slot = ptr::null_mut();
        let inner = ScenarioConfig::from_json(text(json, "json")?, "<json>")?.materialize(None)?;
        *slot = Box::into_raw(Box::new(DsScenario { inner }));
        Ok(())
    })
}

/// # Safety
/// `scenario` must come from this library and not have been freed. Null
/// is ignored.
#[no_mangle]
pub unsafe extern "C" fn ds_scenario_free(scenario: *mut DsScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// # Safety
/// `scenario` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ds_scenario_agent_count(
    scenario: *const DsScenario,
    out_count: *mut usize,
) -> DsStatus {
    guard(|| {
        *out(out_count, "out")? = deref(scenario, "scenario")?.inner.agents.len();
        Ok(())
    })
}

/// # Safety
/// `scenario` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ds_scenario_frame_size(
    scenario: *const DsScenario,
    out_size: *mut usize,
) -> DsStatus {
    guard(|| {
        *out(out_size, "out")? = deref(scenario, "scenario")?.inner.frame.size();
        Ok(())
    })
}

/// Initial opinion of one agent, as a new handle.
///
/// # Safety
/// `scenario` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ds_scenario_initial_opinion(
    scenario: *const DsScenario,
    agent: usize,
    out_boe: *mut *mut DsBoe,
) -> DsStatus {
    guard(|| {
        let slot = out(out_boe, "out")?;
        *slot = ptr::null_mut();
        let sc = &deref(scenario, "scenario")?.inner;
        let a = sc.agents.get(agent).ok_or_else(|| {
            Failure(
                DsStatus::InvalidArgument,
                format!("agent {agent} out of range"),
            )
        })?;
        *slot = Box::into_raw(Box::new(DsBoe {
            inner: a.initial.clone(),
        }));
        Ok(())
    })
}

// ---- runs ----

/// Iterate the scenario until it settles. Pass `NaN` as `epsilon` to keep
/// the scenario's bounds of confidence.
///
/// # Safety
/// `scenario` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ds_run(
    scenario: *const DsScenario,
    epsilon: f64,
    out_run: *mut *mut DsRun,
) -> DsStatus {
    guard(|| {
        let slot = out(out_run, "out")?;
        *slot = ptr::null_mut();
        let sc = &deref(scenario, "scenario")?.inner;
        let inner = run_simulation(sc, epsilon_override(epsilon), &RunOptions::default())?;
        *slot = Box::into_raw(Box::new(DsRun { inner }));
        Ok(())
    })
}

/// # Safety
/// `run` must come from this library and not have been freed. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn ds_run_free(run: *mut DsRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

/// # Safety
/// `run` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ds_run_cluster_count(
    run: *const DsRun,
    out_count: *mut usize,
) -> DsStatus {
    guard(|| {
        *out(out_count, "out")? = deref(run, "run")?.inner.report.cluster_count();
        Ok(())
    })
}

/// # Safety
/// `run` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ds_run_consensus(run: *const DsRun, out_flag: *mut bool) -> DsStatus {
    guard(|| {
        *out(out_flag, "out")? = deref(run, "run")?.inner.report.consensus;
        Ok(())
    })
}

/// # Safety
/// `run` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ds_run_converged(run: *const DsRun, out_flag: *mut bool) -> DsStatus {
    guard(|| {
        *out(out_flag, "out")? = deref(run, "run")?.inner.report.converged;
        Ok(())
    })
}

/// # Safety
/// `run` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ds_run_iterations(run: *const DsRun, out_count: *mut usize) -> DsStatus {
    guard(|| {
        *out(out_count, "out")? = deref(run, "run")?.inner.report.iterations;
        Ok(())
    })
}

/// 0-based cluster index of `agent`.
///
/// # Safety
/// `run` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ds_run_cluster_label(
    run: *const DsRun,
    agent: usize,
    out_label: *mut usize,
) -> DsStatus {
    guard(|| {
        let r = &deref(run, "run")?.inner;
        *out(out_label, "out")? = *r.report.labels.get(agent).ok_or_else(|| {
            Failure(
                DsStatus::InvalidArgument,
                format!("agent {agent} out of range"),
            )
        })?;
        Ok(())
    })
}

/// Final opinion of one agent, as a new handle.
///
/// # Safety
/// `run` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ds_run_final_opinion(
    run: *const DsRun,
    agent: usize,
    out_boe: *mut *mut DsBoe,
) -> DsStatus {
    guard(|| {
        let slot = out(out_boe, "out")?;
        *slot = ptr::null_mut();
        let r = &deref(run, "run")?.inner;
        let o = r.final_opinions.get(agent).ok_or_else(|| {
            Failure(
                DsStatus::InvalidArgument,
                format!("agent {agent} out of range"),
            )
        })?;
        *slot = Box::into_raw(Box::new(DsBoe { inner: o.clone() }));
        Ok(())
    })
}

/// Cluster report as JSON (0-based agent and cluster ids).
///
/// # Safety
/// `run` must be a live handle; `out` must be writable. Free the result
/// with [`ds_string_free`].
#[no_mangle]
pub unsafe extern "C" fn ds_run_report_json(
    run: *const DsRun,
    out_json: *mut *mut c_char,
) -> DsStatus {
    guard(|| {
        let slot = out(out_json, "out")?;
        *slot = ptr::null_mut();
        let r = &deref(run, "run")?.inner;
        *slot = owned_string(serde_json::to_string(&r.report).expect("serializable"));
        Ok(())
    })
}

// ---- sweeps and verification ----

/// Sweep ε over `eps_min, eps_min + eps_step, …, eps_max` on `workers`
/// threads (0 = all cores) and return the bifurcation CSV for `prop`.
///
/// # Safety
/// `scenario` must be a live handle; `out` must be writable. Free the
/// result with [`ds_string_free`].
#[no_mangle]
pub unsafe extern "C" fn ds_sweep_csv(
    scenario: *const DsScenario,
    eps_min: f64,
    eps_max: f64,
    eps_step: f64,
    prop: u32,
    workers: usize,
    out_csv: *mut *mut c_char,
) -> DsStatus {
    guard(|| {
        let slot = out(out_csv, "out")?;
        *slot = ptr::null_mut();
        let sc = &deref(scenario, "scenario")?.inner;
        let grid = epsilon_grid(eps_min, eps_max, eps_step)?;
        let p = proposition(&sc.frame, prop)?;
        let result = run_sweep(sc, &grid, p, (workers > 0).then_some(workers))?;
        let mut buf = Vec::new();
        emit_csv(&result, &mut buf)?;
        *slot = owned_string(String::from_utf8(buf).expect("CSV is UTF-8"));
        Ok(())
    })
}

/// Run the scenario and check the leader-chain conditions with its
/// cautious agents as central groups; returns the JSON report.
///
/// # Safety
/// `scenario` must be a live handle; `out` must be writable. Free the
/// result with [`ds_string_free`].
#[no_mangle]
pub unsafe extern "C" fn ds_verify_json(
    scenario: *const DsScenario,
    epsilon: f64,
    out_json: *mut *mut c_char,
) -> DsStatus {
    guard(|| {
        let slot = out(out_json, "out")?;
        *slot = ptr::null_mut();
        let sc = &deref(scenario, "scenario")?.inner;
        let groups: Vec<Vec<usize>> = sc.leaders.iter().map(|&l| vec![l]).collect();
        let report = verify_report(sc, epsilon_override(epsilon), &groups)?;
        *slot = owned_string(serde_json::to_string(&report).expect("serializable"));
        Ok(())
    })
}
