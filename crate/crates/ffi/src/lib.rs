//! C interface to the recovery solver.
//!
//! Instances and reports cross the boundary as opaque handles. Every call
//! returns a [`RecStatus`]; on failure [`rec_last_error`] holds the message
//! for the calling thread. Strings handed out by this library must be
//! released with [`rec_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use recovery_core::bcg::run_bcg;
use recovery_core::error::RecoveryError;
use recovery_core::instance::{parse_instance, validate_instance, Instance};
use recovery_core::report::{Report, RunStatus};
use recovery_core::seq::{run_seq, SeqMode};

/// Opaque parsed instance.
pub struct RecInstance(Instance);

/// Opaque solver report.
pub struct RecReport(Report);

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RecStatus {
    Ok = 0,
    NullArgument = 1,
    /// Input string is not UTF-8.
    Encoding = 2,
    /// Malformed or inconsistent instance.
    Input = 3,
    /// The solver failed (LP trouble, budget, capacity).
    Solver = 4,
    /// A Rust panic was caught at the boundary.
    Internal = 5,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RecMethod {
    Bcg = 0,
    SeqOe = 1,
    SeqUe = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RecRunStatus {
    Solved = 0,
    TimeLimit = 1,
    Stalled = 2,
    GateInfeasible = 3,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn classify(e: &RecoveryError) -> RecStatus {
    match e {
        RecoveryError::Parse { .. }
        | RecoveryError::Reference(_)
        | RecoveryError::Invalid(_)
        | RecoveryError::Range(_)
        | RecoveryError::Coverage(_)
        | RecoveryError::Io(_) => RecStatus::Input,
        _ => RecStatus::Solver,
    }
}

/// Runs `f`, turning errors and panics into a status plus the thread's message.
fn guard(f: impl FnOnce() -> Result<(), (RecStatus, String)>) -> RecStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RecStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal error: {msg}"));
            RecStatus::Internal
        }
    }
}

fn core_err(e: RecoveryError) -> (RecStatus, String) {
    (classify(&e), e.to_string())
}

fn null(name: &str) -> (RecStatus, String) {
    (RecStatus::NullArgument, format!("{name} is null"))
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn rec_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rec_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses and validates an instance document.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rec_instance_from_json(json: *const c_char, out: *mut *mut RecInstance) -> RecStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        if json.is_null() {
            return Err(null("json"));
        }
        let bytes = CStr::from_ptr(json).to_bytes();
        if std::str::from_utf8(bytes).is_err() {
            return Err((RecStatus::Encoding, "instance text is not UTF-8".into()));
        }
        let inst = parse_instance(bytes).map_err(core_err)?;
        let problems = validate_instance(&inst);
        if !problems.is_empty() {
            return Err(core_err(RecoveryError::Invalid(problems)));
        }
        *out = Box::into_raw(Box::new(RecInstance(inst)));
        Ok(())
    })
}

/// # Safety
/// `inst` must come from [`rec_instance_from_json`] or be null.
#[no_mangle]
pub unsafe extern "C" fn rec_instance_free(inst: *mut RecInstance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}

/// Overrides the wall-clock limit in seconds.
///
/// # Safety
/// `inst` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn rec_instance_set_time_limit(inst: *mut RecInstance, seconds: f64) -> RecStatus {
    guard(|| {
        let inst = inst.as_mut().ok_or_else(|| null("inst"))?;
        if !(seconds.is_finite() && seconds > 0.0) {
            return Err((RecStatus::Input, format!("time limit {seconds} must be positive")));
        }
        inst.0.config.time_limit = seconds;
        Ok(())
    })
}

/// Number of flights, pseudo flights included.
///
/// # Safety
/// `inst` must be a live handle or null (returns 0).
#[no_mangle]
pub unsafe extern "C" fn rec_instance_flight_count(inst: *const RecInstance) -> usize {
    inst.as_ref().map_or(0, |i| i.0.flights.len())
}

/// Solves with the chosen method. A report is produced for every run that
/// finishes, including time-limited and gate-infeasible ones.
///
/// # Safety
/// `inst` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rec_solve(inst: *const RecInstance, method: RecMethod, out: *mut *mut RecReport) -> RecStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let inst = &inst.as_ref().ok_or_else(|| null("inst"))?.0;
        let report = match method {
            RecMethod::Bcg => run_bcg(inst).and_then(|r| r.report()),
            RecMethod::SeqOe => run_seq(inst, SeqMode::Oe, None).and_then(|r| r.report()),
            RecMethod::SeqUe => run_seq(inst, SeqMode::Ue, None).and_then(|r| r.report()),
        }
        .map_err(core_err)?;
        *out = Box::into_raw(Box::new(RecReport(report)));
        Ok(())
    })
}

/// # Safety
/// `report` must come from [`rec_solve`] or be null.
#[no_mangle]
pub unsafe extern "C" fn rec_report_free(report: *mut RecReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// # Safety
/// `report` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rec_report_status(report: *const RecReport, out: *mut RecRunStatus) -> RecStatus {
    guard(|| {
        let r = &report.as_ref().ok_or_else(|| null("report"))?.0;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = match r.status {
            RunStatus::Solved => RecRunStatus::Solved,
            RunStatus::TimeLimit => RecRunStatus::TimeLimit,
            RunStatus::Stalled => RecRunStatus::Stalled,
            RunStatus::GateInfeasible => RecRunStatus::GateInfeasible,
        };
        Ok(())
    })
}

/// Total recovery cost. Fails with `Solver` when the run produced no plan.
///
/// # Safety
/// `report` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rec_report_total_cost(report: *const RecReport, out: *mut f64) -> RecStatus {
    guard(|| {
        let r = &report.as_ref().ok_or_else(|| null("report"))?.0;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let m = r.metrics.as_ref().ok_or((RecStatus::Solver, "report has no plan".to_string()))?;
        *out = m.total_cost;
        Ok(())
    })
}

/// Full report as JSON. Release with [`rec_string_free`].
///
/// # Safety
/// `report` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rec_report_to_json(report: *const RecReport, out: *mut *mut c_char) -> RecStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let r = &report.as_ref().ok_or_else(|| null("report"))?.0;
        let s = CString::new(r.to_json()).map_err(|e| (RecStatus::Internal, e.to_string()))?;
        *out = s.into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn rec_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
