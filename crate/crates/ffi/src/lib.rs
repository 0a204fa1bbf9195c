//! C ABI for the sunny scheduler.
//!
//! Knowledge bases and schedules are opaque handles created by
//! `sunny_kb_load` / `sunny_schedule_build` and released with the matching
//! `*_free` function. Fallible calls return a `SunnyStatus`; on failure the
//! message is available from `sunny_last_error` on the same thread.
//!
//! Strings returned through `char **` out-parameters are owned by the caller
//! and must be released with `sunny_string_free`. Strings returned directly
//! (`sunny_schedule_solver`, `sunny_last_error`) are borrowed.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use sunny::eval::{elect_backup, simulate_schedule};
use sunny::sunny::{build_schedule, Schedule, SunnyConfig};
use sunny::{time, Error, KnowledgeBase, ScalingParams, SolverId};

/// Result codes of fallible calls.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SunnyStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Io = 3,
    Parse = 4,
    InvalidInput = 5,
    UnknownId = 6,
    DimensionMismatch = 7,
    KTooLarge = 8,
    Runner = 9,
    IndexOutOfRange = 10,
    Panic = 11,
}

impl From<&Error> for SunnyStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Io { .. } => SunnyStatus::Io,
            Error::Csv { .. } | Error::Parse(_) => SunnyStatus::Parse,
            Error::UnknownId { .. } => SunnyStatus::UnknownId,
            Error::DimensionMismatch { .. } => SunnyStatus::DimensionMismatch,
            Error::KTooLarge { .. } => SunnyStatus::KTooLarge,
            Error::Runner(_) => SunnyStatus::Runner,
            _ => SunnyStatus::InvalidInput,
        }
    }
}

/// Loaded knowledge base plus scaling fitted on all of its instances.
pub struct SunnyKnowledgeBase {
    kb: KnowledgeBase,
    params: ScalingParams,
}

pub struct SunnySchedule {
    schedule: Schedule,
    names: Vec<CString>,
}

impl SunnySchedule {
    fn new(schedule: Schedule) -> Self {
        let names = schedule.entries.iter().map(|e| CString::new(e.solver.as_str()).unwrap_or_default()).collect();
        Self { schedule, names }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn fail(status: SunnyStatus, msg: &str) -> SunnyStatus {
    set_error(msg);
    status
}

fn guard(f: impl FnOnce() -> Result<(), (SunnyStatus, String)>) -> SunnyStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            SunnyStatus::Ok
        }
        Ok(Err((status, msg))) => fail(status, &msg),
        Err(_) => fail(SunnyStatus::Panic, "internal panic"),
    }
}

fn lib_err(e: Error) -> (SunnyStatus, String) {
    ((&e).into(), e.to_string())
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, (SunnyStatus, String)> {
    if p.is_null() {
        return Err((SunnyStatus::NullArgument, format!("{what} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| (SunnyStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, (SunnyStatus, String)> {
    p.as_ref().ok_or_else(|| (SunnyStatus::NullArgument, format!("{what} is null")))
}

fn out_arg<T>(p: *mut T, what: &str) -> Result<(), (SunnyStatus, String)> {
    if p.is_null() {
        Err((SunnyStatus::NullArgument, format!("{what} is null")))
    } else {
        Ok(())
    }
}

/// Message of the last failed call on this thread; empty after a success.
/// Valid until the next call on this thread.
#[no_mangle]
pub extern "C" fn sunny_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Loads a knowledge base from its features and runtimes files.
///
/// # Safety
/// Path arguments must be NUL-terminated strings; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sunny_kb_load(
    features_path: *const c_char,
    runtimes_path: *const c_char,
    timeout_seconds: f64,
    out: *mut *mut SunnyKnowledgeBase,
) -> SunnyStatus {
    guard(|| {
        out_arg(out, "out")?;
        let features = str_arg(features_path, "features_path")?;
        let runtimes = str_arg(runtimes_path, "runtimes_path")?;
        let timeout = time::seconds_to_ms(timeout_seconds).map_err(lib_err)?;
        let kb = KnowledgeBase::load(Path::new(features), Path::new(runtimes), timeout).map_err(lib_err)?;
        let params = ScalingParams::fit_all(&kb).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(SunnyKnowledgeBase { kb, params }));
        Ok(())
    })
}

/// # Safety
/// `kb` must come from `sunny_kb_load` and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn sunny_kb_free(kb: *mut SunnyKnowledgeBase) {
    if !kb.is_null() {
        drop(Box::from_raw(kb));
    }
}

/// # Safety
/// `kb` must be a live handle or null (which yields 0).
#[no_mangle]
pub unsafe extern "C" fn sunny_kb_num_instances(kb: *const SunnyKnowledgeBase) -> usize {
    kb.as_ref().map_or(0, |h| h.kb.num_instances())
}

/// # Safety
/// `kb` must be a live handle or null (which yields 0).
#[no_mangle]
pub unsafe extern "C" fn sunny_kb_num_solvers(kb: *const SunnyKnowledgeBase) -> usize {
    kb.as_ref().map_or(0, |h| h.kb.num_solvers())
}

/// Raw feature dimension expected by `sunny_schedule_build`.
///
/// # Safety
/// `kb` must be a live handle or null (which yields 0).
#[no_mangle]
pub unsafe extern "C" fn sunny_kb_dimension(kb: *const SunnyKnowledgeBase) -> usize {
    kb.as_ref().map_or(0, |h| h.kb.dimension())
}

/// Builds the schedule for a raw feature vector over every solver of the
/// knowledge base with its timeout. A null `backup` elects the solver that
/// solves the most instances.
///
/// # Safety
/// `query` must point to `len` doubles; `backup` is null or a NUL-terminated
/// string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sunny_schedule_build(
    kb: *const SunnyKnowledgeBase,
    query: *const f64,
    len: usize,
    k: usize,
    backup: *const c_char,
    out: *mut *mut SunnySchedule,
) -> SunnyStatus {
    guard(|| {
        out_arg(out, "out")?;
        let h = ref_arg(kb, "kb")?;
        if query.is_null() && len > 0 {
            return Err((SunnyStatus::NullArgument, "query is null".into()));
        }
        let raw = if len == 0 { &[][..] } else { std::slice::from_raw_parts(query, len) };
        let backup = if backup.is_null() {
            elect_backup(&h.kb, h.kb.solvers()).map_err(lib_err)?
        } else {
            SolverId::new(str_arg(backup, "backup")?)
        };
        let config = SunnyConfig::for_kb(&h.kb, k, backup);
        let scaled = h.params.apply(raw).map_err(lib_err)?;
        let schedule = build_schedule(&scaled, &config, &h.kb, &h.params).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(SunnySchedule::new(schedule)));
        Ok(())
    })
}

/// Parses a schedule document.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sunny_schedule_from_json(json: *const c_char, out: *mut *mut SunnySchedule) -> SunnyStatus {
    guard(|| {
        out_arg(out, "out")?;
        let schedule = Schedule::from_json(str_arg(json, "json")?).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(SunnySchedule::new(schedule)));
        Ok(())
    })
}

/// # Safety
/// `schedule` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn sunny_schedule_free(schedule: *mut SunnySchedule) {
    if !schedule.is_null() {
        drop(Box::from_raw(schedule));
    }
}

/// Number of entries; 0 for null.
///
/// # Safety
/// `schedule` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn sunny_schedule_len(schedule: *const SunnySchedule) -> usize {
    schedule.as_ref().map_or(0, |s| s.schedule.entries.len())
}

/// # Safety
/// `schedule` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn sunny_schedule_slots(schedule: *const SunnySchedule) -> u64 {
    schedule.as_ref().map_or(0, |s| s.schedule.slots)
}

/// Solver of entry `index`, or null when out of range. Borrowed from the
/// schedule.
///
/// # Safety
/// `schedule` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn sunny_schedule_solver(schedule: *const SunnySchedule, index: usize) -> *const c_char {
    schedule.as_ref().and_then(|s| s.names.get(index)).map_or(ptr::null(), |n| n.as_ptr())
}

/// Seconds allotted to entry `index`, or a negative value when out of range.
///
/// # Safety
/// `schedule` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn sunny_schedule_seconds(schedule: *const SunnySchedule, index: usize) -> f64 {
    schedule.as_ref().and_then(|s| s.schedule.entries.get(index)).map_or(-1.0, |e| e.seconds())
}

/// Serializes the schedule document into a new string.
///
/// # Safety
/// `schedule` must be a live handle; `out` must be writable. Release the
/// string with `sunny_string_free`.
#[no_mangle]
pub unsafe extern "C" fn sunny_schedule_to_json(schedule: *const SunnySchedule, out: *mut *mut c_char) -> SunnyStatus {
    guard(|| {
        out_arg(out, "out")?;
        let s = ref_arg(schedule, "schedule")?;
        let json = CString::new(s.schedule.to_json())
            .map_err(|_| (SunnyStatus::InvalidInput, "schedule contains NUL".to_string()))?;
        *out = json.into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn sunny_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Replays a schedule on a knowledge-base instance using its recorded
/// runtimes and feature cost.
///
/// # Safety
/// Handles must be live; `instance` NUL-terminated; `solved` and `seconds`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn sunny_simulate(
    kb: *const SunnyKnowledgeBase,
    schedule: *const SunnySchedule,
    instance: *const c_char,
    solved: *mut bool,
    seconds: *mut f64,
) -> SunnyStatus {
    guard(|| {
        out_arg(solved, "solved")?;
        out_arg(seconds, "seconds")?;
        let h = ref_arg(kb, "kb")?;
        let s = ref_arg(schedule, "schedule")?;
        let outcome = simulate_schedule(&s.schedule, str_arg(instance, "instance")?, &h.kb).map_err(lib_err)?;
        *solved = outcome.solved;
        *seconds = outcome.seconds();
        Ok(())
    })
}

/// Index-checked variant for bindings that prefer status codes over sentinels.
///
/// # Safety
/// `schedule` must be a live handle; `seconds` writable.
#[no_mangle]
pub unsafe extern "C" fn sunny_schedule_entry_seconds(
    schedule: *const SunnySchedule,
    index: usize,
    seconds: *mut f64,
) -> SunnyStatus {
    guard(|| {
        out_arg(seconds, "seconds")?;
        let s = ref_arg(schedule, "schedule")?;
        let e =
            s.schedule.entries.get(index).ok_or_else(|| {
                (SunnyStatus::IndexOutOfRange, format!("entry {index} of {}", s.schedule.entries.len()))
            })?;
        *seconds = e.seconds();
        Ok(())
    })
}
