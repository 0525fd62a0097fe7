//! C interface to the `mfnipr` solver.
//!
//! Every fallible call returns an [`MfnStatus`]; on failure the message is
//! available from [`mfn_last_error`] on the same thread. Handles are opaque and
//! must be released with their matching `*_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;
use std::time::Duration;

use mfnipr::ccg::{self, CcgConfig, CcgResult, CcgStatus, Mode};
use mfnipr::instance::{Instance, Variant};
use mfnipr::netgen::{self, GenParams};
use mfnipr::network;
use mfnipr::restructure::{InterdictionPlan, RestructurePlan};
use mfnipr::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MfnStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Validation = 3,
    Parse = 4,
    Io = 5,
    Resource = 6,
    Numerical = 7,
    Infeasible = 8,
    Internal = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MfnVariant {
    Base = 0,
    Recruitment = 1,
    Organizational = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MfnMode {
    PartialInfo = 0,
    Baseline = 1,
    Enumerate = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MfnSolveStatus {
    Optimal = 0,
    TimeLimit = 1,
    IterationLimit = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct MfnSolveOptions {
    pub mode: MfnMode,
    pub budget: f64,
    pub epsilon: f64,
    /// Seconds; zero or negative means no limit.
    pub time_limit: f64,
    pub leadership: bool,
}

/// A validated instance.
pub struct MfnInstance(Instance);

/// The outcome of [`mfn_solve`].
pub struct MfnSolveResult {
    result: CcgResult,
    json: serde_json::Value,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(err: &Error) -> MfnStatus {
    match err {
        Error::Validation(_) => MfnStatus::Validation,
        Error::Parse { .. } => MfnStatus::Parse,
        Error::Io { .. } => MfnStatus::Io,
        Error::Resource { .. } => MfnStatus::Resource,
        Error::Numerical(_) => MfnStatus::Numerical,
        Error::Infeasible(_) => MfnStatus::Infeasible,
        Error::Internal(_) => MfnStatus::Internal,
    }
}

enum Failure {
    Status(MfnStatus, String),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

fn null(what: &str) -> Failure {
    Failure::Status(MfnStatus::NullPointer, format!("{what} is null"))
}

fn guard(body: impl FnOnce() -> Result<(), Failure>) -> MfnStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => MfnStatus::Ok,
        Ok(Err(Failure::Status(status, msg))) => {
            set_error(msg);
            status
        }
        Ok(Err(Failure::Core(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("panic inside mfnipr".into());
            MfnStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::Status(MfnStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn read<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

fn into_c_string(s: String) -> Result<*mut c_char, Failure> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| Failure::Status(MfnStatus::Internal, "string contains a NUL byte".into()))
}

/// Message for the last failed call on this thread, or null. Valid until the
/// next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn mfn_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// # Safety
/// `json` must be a NUL-terminated string and `instance` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn mfn_instance_from_json(
    json: *const c_char,
    instance: *mut *mut MfnInstance,
) -> MfnStatus {
    guard(|| {
        let slot = out(instance, "instance")?;
        let inst = Instance::from_json(text(json, "json")?)?;
        *slot = Box::into_raw(Box::new(MfnInstance(inst)));
        Ok(())
    })
}

/// # Safety
/// `path` must be a NUL-terminated string and `instance` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn mfn_instance_from_file(
    path: *const c_char,
    instance: *mut *mut MfnInstance,
) -> MfnStatus {
    guard(|| {
        let slot = out(instance, "instance")?;
        let inst = Instance::read(Path::new(text(path, "path")?))?;
        *slot = Box::into_raw(Box::new(MfnInstance(inst)));
        Ok(())
    })
}

/// Seeded instance with the default generator settings.
///
/// # Safety
/// `instance` must be a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn mfn_instance_generate(
    seed: u64,
    users: usize,
    variant: MfnVariant,
    instance: *mut *mut MfnInstance,
) -> MfnStatus {
    guard(|| {
        let slot = out(instance, "instance")?;
        let params = GenParams {
            seed,
            num_users: users,
            variant: match variant {
                MfnVariant::Base => Variant::Base,
                MfnVariant::Recruitment => Variant::Recruitment,
                MfnVariant::Organizational => Variant::Organizational,
            },
            ..Default::default()
        };
        *slot = Box::into_raw(Box::new(MfnInstance(netgen::generate(&params)?)));
        Ok(())
    })
}

/// # Safety
/// `instance` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mfn_instance_free(instance: *mut MfnInstance) {
    if !instance.is_null() {
        drop(Box::from_raw(instance));
    }
}

/// # Safety
/// `instance` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mfn_instance_num_nodes(instance: *const MfnInstance) -> usize {
    instance.as_ref().map_or(0, |i| i.0.network.num_nodes())
}

/// # Safety
/// `instance` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mfn_instance_num_restructurable(instance: *const MfnInstance) -> usize {
    instance
        .as_ref()
        .map_or(0, |i| i.0.network.restructurable_arcs.len())
}

/// Maximum flow with no interdiction and no restructuring.
///
/// # Safety
/// `instance` must be a live handle and `value` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn mfn_instance_base_flow(
    instance: *const MfnInstance,
    value: *mut f64,
) -> MfnStatus {
    guard(|| {
        let net = &read(instance, "instance")?.0.network;
        let slot = out(value, "value")?;
        let snet = network::split_nodes(net)?;
        let y = InterdictionPlan::none(net.num_nodes());
        let z = RestructurePlan::empty(net.restructurable_arcs.len());
        *slot = network::max_flow(&snet, &y, &z).value;
        Ok(())
    })
}

/// Serializes the instance; release the string with [`mfn_string_free`].
///
/// # Safety
/// `instance` must be a live handle and `json` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn mfn_instance_to_json(
    instance: *const MfnInstance,
    json: *mut *mut c_char,
) -> MfnStatus {
    guard(|| {
        let inst = &read(instance, "instance")?.0;
        let slot = out(json, "json")?;
        *slot = into_c_string(inst.to_json())?;
        Ok(())
    })
}

#[no_mangle]
pub extern "C" fn mfn_solve_options_default() -> MfnSolveOptions {
    MfnSolveOptions {
        mode: MfnMode::PartialInfo,
        budget: 0.0,
        epsilon: CcgConfig::default().epsilon,
        time_limit: 600.0,
        leadership: false,
    }
}

/// # Safety
/// `instance` and `options` must be live, `result` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn mfn_solve(
    instance: *const MfnInstance,
    options: *const MfnSolveOptions,
    result: *mut *mut MfnSolveResult,
) -> MfnStatus {
    guard(|| {
        let inst = &read(instance, "instance")?.0;
        let opts = read(options, "options")?;
        let slot = out(result, "result")?;
        if !(opts.budget >= 0.0) || !opts.epsilon.is_finite() || opts.epsilon < 0.0 {
            return Err(Failure::Status(
                MfnStatus::InvalidArgument,
                "budget and epsilon must be finite and non-negative".into(),
            ));
        }
        let time_limit = if opts.time_limit > 0.0 {
            Some(Duration::try_from_secs_f64(opts.time_limit).map_err(|_| {
                Failure::Status(MfnStatus::InvalidArgument, "time limit out of range".into())
            })?)
        } else {
            None
        };
        let config = CcgConfig {
            mode: match opts.mode {
                MfnMode::PartialInfo => Mode::PartialInfo,
                MfnMode::Baseline => Mode::Baseline,
                MfnMode::Enumerate => Mode::Enumerate,
            },
            epsilon: opts.epsilon,
            time_limit,
            ..Default::default()
        };
        let irules = inst.interdiction_rules(opts.budget, opts.leadership);
        let res = ccg::solve(&inst.network, &irules, &inst.restructure_rules(), &config)?;
        let json = mfnipr::cli::result_json(inst, opts.budget, &res);
        *slot = Box::into_raw(Box::new(MfnSolveResult { result: res, json }));
        Ok(())
    })
}

/// # Safety
/// `result` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mfn_result_free(result: *mut MfnSolveResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// NaN for a null handle.
///
/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mfn_result_lower(result: *const MfnSolveResult) -> f64 {
    result.as_ref().map_or(f64::NAN, |r| r.result.lower)
}

/// NaN for a null handle.
///
/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mfn_result_upper(result: *const MfnSolveResult) -> f64 {
    result.as_ref().map_or(f64::NAN, |r| r.result.upper)
}

/// # Safety
/// `result` must be a live handle and `status` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn mfn_result_status(
    result: *const MfnSolveResult,
    status: *mut MfnSolveStatus,
) -> MfnStatus {
    guard(|| {
        let r = read(result, "result")?;
        *out(status, "status")? = match r.result.status {
            CcgStatus::Optimal => MfnSolveStatus::Optimal,
            CcgStatus::TimeLimit => MfnSolveStatus::TimeLimit,
            CcgStatus::IterationLimit => MfnSolveStatus::IterationLimit,
        };
        Ok(())
    })
}

/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mfn_result_iterations(result: *const MfnSolveResult) -> usize {
    result.as_ref().map_or(0, |r| r.result.iterations.len())
}

/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mfn_result_plans_visited(result: *const MfnSolveResult) -> usize {
    result.as_ref().map_or(0, |r| r.result.plans_visited)
}

/// Copies up to `capacity` interdicted node ids into `nodes` and returns how
/// many there are in total. `nodes` may be null when `capacity` is 0.
///
/// # Safety
/// `result` must be null or a live handle; `nodes` must have room for
/// `capacity` entries.
#[no_mangle]
pub unsafe extern "C" fn mfn_result_interdicted(
    result: *const MfnSolveResult,
    nodes: *mut usize,
    capacity: usize,
) -> usize {
    let Some(r) = result.as_ref() else {
        return 0;
    };
    let ids = r.result.interdiction.interdicted();
    if !nodes.is_null() {
        let n = ids.len().min(capacity);
        ptr::copy_nonoverlapping(ids.as_ptr(), nodes, n);
    }
    ids.len()
}

/// The result in the command-line `--out` layout; release the string with
/// [`mfn_string_free`].
///
/// # Safety
/// `result` must be a live handle and `json` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn mfn_result_to_json(
    result: *const MfnSolveResult,
    json: *mut *mut c_char,
) -> MfnStatus {
    guard(|| {
        let r = read(result, "result")?;
        let slot = out(json, "json")?;
        let text = serde_json::to_string_pretty(&r.json)
            .map_err(|e| Failure::Status(MfnStatus::Internal, e.to_string()))?;
        *slot = into_c_string(text)?;
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mfn_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
