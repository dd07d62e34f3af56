//! C ABI over `tourplan`.
//!
//! Instances and plans are opaque handles created and freed by this library.
//! Every fallible call returns a [`TpStatus`]; on failure the message is
//! available from [`tp_last_error_message`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use tourplan::cli::plan_document;
use tourplan::domain::{Instance, Problem};
use tourplan::error::Error;
use tourplan::instances::{read_instance, read_instance_file};
use tourplan::model::Tours;
use tourplan::oracle::oracle_solve;
use tourplan::pipeline::{plan, Plan, PlanOptions};

/// Result codes. Zero is success.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TpStatus {
    Ok = 0,
    /// A null pointer, bad index or out-of-range option.
    InvalidArgument = 1,
    /// The instance document or the problem data is invalid.
    InvalidInput = 2,
    Infeasible = 3,
    /// Time limit reached before any feasible plan was found.
    TimeLimit = 4,
    /// Numerical failure or a panic inside the library.
    Internal = 5,
}

/// Opaque instance handle.
pub struct TpInstance {
    inner: Instance,
}

/// Opaque solve result.
pub struct TpPlan {
    instance: Instance,
    plan: Plan,
}

/// Solve settings. Start from [`tp_solve_options_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct TpSolveOptions {
    pub epsilon: f64,
    /// Stop once the relative gap is at or below this value.
    pub gap: f64,
    /// Seconds; zero or negative means no limit.
    pub time_limit: f64,
    /// Number of tours, at least 1.
    pub tours: u32,
    /// With several tours, start them at distinct bases.
    pub disjoint: bool,
    /// Let trips end at a different base.
    pub non_cyclic: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> TpStatus {
    match err {
        Error::Infeasible | Error::RequirementUnreachable { .. } | Error::InfeasibleStructure(_) => TpStatus::Infeasible,
        Error::TimeLimitNoIncumbent => TpStatus::TimeLimit,
        Error::Numerical(_) => TpStatus::Internal,
        Error::EpsilonOutOfRange(_) | Error::OptionConflict(_) => TpStatus::InvalidArgument,
        _ => TpStatus::InvalidInput,
    }
}

fn guard(f: impl FnOnce() -> Result<(), (TpStatus, String)>) -> TpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            TpStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            TpStatus::Internal
        }
    }
}

fn lib_err(err: Error) -> (TpStatus, String) {
    (status_of(&err), err.to_string())
}

fn bad_arg(msg: &str) -> (TpStatus, String) {
    (TpStatus::InvalidArgument, msg.to_string())
}

unsafe fn c_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, (TpStatus, String)> {
    if p.is_null() {
        return Err(bad_arg(&format!("{what} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| bad_arg(&format!("{what} is not UTF-8")))
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn tp_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn tp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses an instance document.
///
/// # Safety
/// `json` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tp_instance_from_json(json: *const c_char, out: *mut *mut TpInstance) -> TpStatus {
    guard(|| {
        if out.is_null() {
            return Err(bad_arg("out is null"));
        }
        let text = c_str(json, "json")?;
        let inner = read_instance(text).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(TpInstance { inner }));
        Ok(())
    })
}

/// Reads an instance document from a file.
///
/// # Safety
/// `path` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tp_instance_from_file(path: *const c_char, out: *mut *mut TpInstance) -> TpStatus {
    guard(|| {
        if out.is_null() {
            return Err(bad_arg("out is null"));
        }
        let p = c_str(path, "path")?;
        let inner = read_instance_file(Path::new(p)).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(TpInstance { inner }));
        Ok(())
    })
}

/// # Safety
/// `inst` must come from this library and not be used afterwards. Null is
/// ignored.
#[no_mangle]
pub unsafe extern "C" fn tp_instance_free(inst: *mut TpInstance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}

/// Number of POIs, or 0 for a null handle.
///
/// # Safety
/// `inst` must be null or a live instance handle.
#[no_mangle]
pub unsafe extern "C" fn tp_instance_poi_count(inst: *const TpInstance) -> usize {
    inst.as_ref().map_or(0, |i| i.inner.n())
}

unsafe fn set_problem(inst: *mut TpInstance, problem: Problem) -> TpStatus {
    guard(|| {
        let i = inst.as_mut().ok_or_else(|| bad_arg("instance is null"))?;
        if !(problem.value().is_finite() && problem.value() >= 0.0) {
            return Err(bad_arg("limit must be finite and non-negative"));
        }
        i.inner = i.inner.clone().with_problem(problem);
        Ok(())
    })
}

/// Switches the instance to reward maximization under `budget`.
///
/// # Safety
/// `inst` must be a live instance handle.
#[no_mangle]
pub unsafe extern "C" fn tp_instance_set_rmt(inst: *mut TpInstance, budget: f64) -> TpStatus {
    set_problem(inst, Problem::Rmt { budget })
}

/// Switches the instance to time minimization with reward `requirement`.
///
/// # Safety
/// `inst` must be a live instance handle.
#[no_mangle]
pub unsafe extern "C" fn tp_instance_set_bmt(inst: *mut TpInstance, requirement: f64) -> TpStatus {
    set_problem(inst, Problem::Bmt { requirement })
}

#[no_mangle]
pub extern "C" fn tp_solve_options_default() -> TpSolveOptions {
    let d = PlanOptions::default();
    TpSolveOptions { epsilon: d.epsilon, gap: 0.0, time_limit: 0.0, tours: 1, disjoint: false, non_cyclic: false }
}

fn plan_options(o: &TpSolveOptions) -> Result<PlanOptions, (TpStatus, String)> {
    if o.tours == 0 {
        return Err(bad_arg("tours must be at least 1"));
    }
    let mut opts = PlanOptions { epsilon: o.epsilon, ..PlanOptions::default() };
    opts.build.epsilon = o.epsilon;
    opts.build.cyclic = !o.non_cyclic;
    opts.build.tours = match (o.tours, o.disjoint) {
        (1, _) => Tours::Single,
        (m, true) => Tours::Disjoint { m: m as usize, per_tour_limit: None },
        (m, false) => Tours::Shared { m: m as usize, per_tour_limit: None },
    };
    opts.solve.target_gap = o.gap;
    opts.solve.time_limit = (o.time_limit > 0.0).then_some(o.time_limit);
    opts.solve.validate().map_err(lib_err)?;
    Ok(opts)
}

/// Solves the instance. `options` may be null for the defaults.
///
/// # Safety
/// `inst` must be a live instance handle, `options` null or valid, and
/// `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tp_solve(
    inst: *const TpInstance,
    options: *const TpSolveOptions,
    out: *mut *mut TpPlan,
) -> TpStatus {
    guard(|| {
        let i = inst.as_ref().ok_or_else(|| bad_arg("instance is null"))?;
        if out.is_null() {
            return Err(bad_arg("out is null"));
        }
        let o = options.as_ref().copied().unwrap_or_else(|| tp_solve_options_default());
        let opts = plan_options(&o)?;
        let p = plan(&i.inner, &opts, &mut |_| {}).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(TpPlan { instance: i.inner.clone(), plan: p }));
        Ok(())
    })
}

/// Exhaustive optimum for small instances.
///
/// # Safety
/// `inst` must be a live instance handle and `value` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tp_oracle(inst: *const TpInstance, value: *mut f64) -> TpStatus {
    guard(|| {
        let i = inst.as_ref().ok_or_else(|| bad_arg("instance is null"))?;
        if value.is_null() {
            return Err(bad_arg("value is null"));
        }
        *value = oracle_solve(&i.inner).map_err(lib_err)?.value;
        Ok(())
    })
}

/// # Safety
/// `plan` must come from [`tp_solve`] and not be used afterwards. Null is
/// ignored.
#[no_mangle]
pub unsafe extern "C" fn tp_plan_free(plan: *mut TpPlan) {
    if !plan.is_null() {
        drop(Box::from_raw(plan));
    }
}

/// Total true reward for reward maximization, total time otherwise. NaN
/// for a null handle.
///
/// # Safety
/// `plan` must be null or a live plan handle.
#[no_mangle]
pub unsafe extern "C" fn tp_plan_objective(plan: *const TpPlan) -> f64 {
    plan.as_ref().map_or(f64::NAN, |p| match p.instance.problem {
        Problem::Rmt { .. } => p.plan.true_reward(),
        Problem::Bmt { .. } => p.plan.total_time(),
    })
}

/// # Safety
/// `plan` must be null or a live plan handle.
#[no_mangle]
pub unsafe extern "C" fn tp_plan_true_reward(plan: *const TpPlan) -> f64 {
    plan.as_ref().map_or(f64::NAN, |p| p.plan.true_reward())
}

/// # Safety
/// `plan` must be null or a live plan handle.
#[no_mangle]
pub unsafe extern "C" fn tp_plan_total_time(plan: *const TpPlan) -> f64 {
    plan.as_ref().map_or(f64::NAN, |p| p.plan.total_time())
}

/// Relative gap at termination.
///
/// # Safety
/// `plan` must be null or a live plan handle.
#[no_mangle]
pub unsafe extern "C" fn tp_plan_gap(plan: *const TpPlan) -> f64 {
    plan.as_ref().map_or(f64::NAN, |p| p.plan.result.gap)
}

/// # Safety
/// `plan` must be null or a live plan handle.
#[no_mangle]
pub unsafe extern "C" fn tp_plan_tour_count(plan: *const TpPlan) -> usize {
    plan.as_ref().map_or(0, |p| p.plan.itineraries.len())
}

/// Start base of `tour`, or 0 when out of range.
///
/// # Safety
/// `plan` must be null or a live plan handle.
#[no_mangle]
pub unsafe extern "C" fn tp_plan_start_base(plan: *const TpPlan, tour: usize) -> u32 {
    plan.as_ref().and_then(|p| p.plan.itineraries.get(tour)).map_or(0, |it| it.start_base as u32)
}

/// Number of stays in `tour`, or 0 when out of range.
///
/// # Safety
/// `plan` must be null or a live plan handle.
#[no_mangle]
pub unsafe extern "C" fn tp_plan_stop_count(plan: *const TpPlan, tour: usize) -> usize {
    plan.as_ref().and_then(|p| p.plan.itineraries.get(tour)).map_or(0, |it| it.stays.len())
}

/// The `index`-th stay of `tour`: POI id (1-based) and duration.
///
/// # Safety
/// `plan` must be a live plan handle; `poi` and `duration` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn tp_plan_stop(
    plan: *const TpPlan,
    tour: usize,
    index: usize,
    poi: *mut u32,
    duration: *mut f64,
) -> TpStatus {
    guard(|| {
        let p = plan.as_ref().ok_or_else(|| bad_arg("plan is null"))?;
        if poi.is_null() || duration.is_null() {
            return Err(bad_arg("output pointer is null"));
        }
        let it = p.plan.itineraries.get(tour).ok_or_else(|| bad_arg("tour index out of range"))?;
        let s = it.stays.get(index).ok_or_else(|| bad_arg("stop index out of range"))?;
        *poi = s.poi as u32;
        *duration = s.duration;
        Ok(())
    })
}

/// The plan as a JSON document (same shape as the CLI's itinerary file).
/// Free the result with [`tp_string_free`]. Null for a null handle.
///
/// # Safety
/// `plan` must be null or a live plan handle.
#[no_mangle]
pub unsafe extern "C" fn tp_plan_to_json(plan: *const TpPlan) -> *mut c_char {
    match plan.as_ref() {
        Some(p) => CString::new(plan_document(&p.instance, &p.plan).to_string()).map_or(ptr::null_mut(), CString::into_raw),
        None => ptr::null_mut(),
    }
}

/// # Safety
/// `s` must come from this library and not be used afterwards. Null is
/// ignored.
#[no_mangle]
pub unsafe extern "C" fn tp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
