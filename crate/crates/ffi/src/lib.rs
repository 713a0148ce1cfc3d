//! C interface to the explorer.
//!
//! Systems and reports are opaque handles created and destroyed through this
//! API. Every fallible call returns a [`UdStatus`]; on failure the message is
//! available from [`ud_last_error`] on the same thread. Strings returned by
//! the library must be released with [`ud_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use unfold_dpor::bench::{generate, Family};
use unfold_dpor::cutoff::AdequateOrder;
use unfold_dpor::explorer::{explore, ChoicePolicy, Eviction, ExplorationReport, ExploreError, ExploreOptions};
use unfold_dpor::model::{is_petri_net, load_petri_net, load_system, DependenceMode, SystemDef};
use unfold_dpor::oracle::{cross_check, CheckStatus, OracleBounds};

/// Result of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UdStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    LoadError = 3,
    InvalidArgument = 4,
    BoundExceeded = 5,
    ExploreError = 6,
    Panic = 7,
}

/// Dependence relation used when a Petri net is compiled.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UdDependence {
    ReadArcs = 0,
    Classic = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UdOrder {
    Size = 0,
    Total = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UdCache {
    KeepAll = 0,
    EvictAll = 1,
    Lru = 2,
}

/// Exploration settings. Zero bounds mean unbounded.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct UdOptions {
    pub cutoffs: bool,
    pub order: UdOrder,
    /// Use the seeded random choice policy instead of the ordered one.
    pub random_policy: bool,
    pub seed: u64,
    pub max_events: usize,
    pub max_depth: usize,
    pub cache: UdCache,
    /// Capacity for `UD_CACHE_LRU`.
    pub cache_size: usize,
}

/// A loaded system.
pub struct UdSystem {
    sys: SystemDef,
}

/// Counters of a finished exploration.
pub struct UdReport {
    report: ExplorationReport,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn fail(status: UdStatus, msg: impl Into<String>) -> UdStatus {
    set_error(msg);
    status
}

fn guard(f: impl FnOnce() -> UdStatus) -> UdStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| fail(UdStatus::Panic, "internal panic"))
}

unsafe fn read_str<'a>(p: *const c_char) -> Result<&'a str, UdStatus> {
    if p.is_null() {
        return Err(fail(UdStatus::NullArgument, "null string argument"));
    }
    CStr::from_ptr(p).to_str().map_err(|_| fail(UdStatus::InvalidUtf8, "argument is not valid UTF-8"))
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).map(CString::into_raw).unwrap_or(ptr::null_mut())
}

unsafe fn store_system(out: *mut *mut UdSystem, sys: SystemDef) -> UdStatus {
    *out = Box::into_raw(Box::new(UdSystem { sys }));
    UdStatus::Ok
}

fn compile_mode(d: UdDependence) -> DependenceMode {
    match d {
        UdDependence::ReadArcs => DependenceMode::ReadArcs,
        UdDependence::Classic => DependenceMode::Classic,
    }
}

/// The last error message on this thread, or NULL. Valid until the next call into the library.
#[no_mangle]
pub extern "C" fn ud_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ud_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn ud_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a system description. Petri nets (objects with a `places` key) are compiled with `dependence`.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ud_system_from_json(
    json: *const c_char,
    dependence: UdDependence,
    out: *mut *mut UdSystem,
) -> UdStatus {
    guard(|| {
        if out.is_null() {
            return fail(UdStatus::NullArgument, "null output pointer");
        }
        let text = match read_str(json) {
            Ok(t) => t,
            Err(s) => return s,
        };
        let parsed =
            if is_petri_net(text) { load_petri_net(text, compile_mode(dependence)) } else { load_system(text) };
        match parsed {
            Ok(sys) => store_system(out, sys),
            Err(e) => fail(UdStatus::LoadError, e.to_string()),
        }
    })
}

/// Builds a benchmark system such as `"ccnf:9"`, `"readers:3"` or `"writer-readers"`.
///
/// # Safety
/// `family` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ud_system_generate(
    family: *const c_char,
    dependence: UdDependence,
    out: *mut *mut UdSystem,
) -> UdStatus {
    guard(|| {
        if out.is_null() {
            return fail(UdStatus::NullArgument, "null output pointer");
        }
        let name = match read_str(family) {
            Ok(t) => t,
            Err(s) => return s,
        };
        let family: Family = match name.parse() {
            Ok(f) => f,
            Err(e) => return fail(UdStatus::InvalidArgument, e),
        };
        match generate(family) {
            Ok(b) => store_system(out, b.into_system(compile_mode(dependence))),
            Err(e) => fail(UdStatus::InvalidArgument, e),
        }
    })
}

/// # Safety
/// `sys` must be NULL or a handle from this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn ud_system_free(sys: *mut UdSystem) {
    if !sys.is_null() {
        drop(Box::from_raw(sys));
    }
}

/// Number of transitions, or 0 for NULL.
///
/// # Safety
/// `sys` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ud_system_transition_count(sys: *const UdSystem) -> usize {
    sys.as_ref().map_or(0, |s| s.sys.transitions.len())
}

/// Default settings: cutoffs on, size order, ordered policy, no bounds, no eviction.
#[no_mangle]
pub extern "C" fn ud_options_default() -> UdOptions {
    UdOptions {
        cutoffs: true,
        order: UdOrder::Size,
        random_policy: false,
        seed: 0,
        max_events: 0,
        max_depth: 0,
        cache: UdCache::KeepAll,
        cache_size: 0,
    }
}

fn to_options(o: &UdOptions) -> ExploreOptions {
    ExploreOptions {
        cutoffs: o.cutoffs,
        order: match o.order {
            UdOrder::Size => AdequateOrder::Size,
            UdOrder::Total => AdequateOrder::SizeThenParikh,
        },
        policy: if o.random_policy { ChoicePolicy::Random(o.seed) } else { ChoicePolicy::Ordered },
        max_events: (o.max_events > 0).then_some(o.max_events),
        max_depth: (o.max_depth > 0).then_some(o.max_depth),
        cache: match o.cache {
            UdCache::KeepAll => Eviction::None,
            UdCache::EvictAll => Eviction::All,
            UdCache::Lru => Eviction::Lru(o.cache_size),
        },
        ..Default::default()
    }
}

fn explore_status(e: &ExploreError) -> UdStatus {
    match e {
        ExploreError::EventBound(_) | ExploreError::DepthBound(_) => UdStatus::BoundExceeded,
        _ => UdStatus::ExploreError,
    }
}

/// Explores `sys`. `opts` may be NULL for the defaults.
///
/// # Safety
/// `sys` must be a live handle, `opts` NULL or valid, `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ud_explore(sys: *const UdSystem, opts: *const UdOptions, out: *mut *mut UdReport) -> UdStatus {
    guard(|| {
        let (Some(sys), false) = (sys.as_ref(), out.is_null()) else {
            return fail(UdStatus::NullArgument, "null system or output pointer");
        };
        let opts = to_options(opts.as_ref().unwrap_or(&ud_options_default()));
        match explore(&sys.sys, &opts) {
            Ok(run) => {
                *out = Box::into_raw(Box::new(UdReport { report: run.report }));
                UdStatus::Ok
            }
            Err(e) => fail(explore_status(&e), e.to_string()),
        }
    })
}

/// Explores `sys` and cross-checks the result against the brute-force oracle.
/// `*passed` is set to whether no check failed. If `summary` is not NULL it
/// receives one line per check, to be freed with `ud_string_free`.
///
/// # Safety
/// `sys` must be a live handle, `opts` NULL or valid, `passed` valid, `summary` NULL or valid.
#[no_mangle]
pub unsafe extern "C" fn ud_verify(
    sys: *const UdSystem,
    opts: *const UdOptions,
    passed: *mut bool,
    summary: *mut *mut c_char,
) -> UdStatus {
    guard(|| {
        let (Some(sys), false) = (sys.as_ref(), passed.is_null()) else {
            return fail(UdStatus::NullArgument, "null system or output pointer");
        };
        let opts = to_options(opts.as_ref().unwrap_or(&ud_options_default()));
        let run = match explore(&sys.sys, &opts) {
            Ok(r) => r,
            Err(e) => return fail(explore_status(&e), e.to_string()),
        };
        let verdict = cross_check(&sys.sys, &run, &OracleBounds::default());
        *passed = verdict.passed();
        if !summary.is_null() {
            let text: String = verdict
                .checks
                .iter()
                .map(|c| {
                    let status = match c.status {
                        CheckStatus::Pass => "pass",
                        CheckStatus::Fail => "FAIL",
                        CheckStatus::Skipped => "skip",
                    };
                    format!("{} {status} {}\n", c.name, c.detail)
                })
                .collect();
            *summary = into_c_string(text);
        }
        UdStatus::Ok
    })
}

/// # Safety
/// `r` must be NULL or a report handle that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn ud_report_free(r: *mut UdReport) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// Number of maximal (terminal, with cutoffs) configurations explored.
///
/// # Safety
/// `r` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ud_report_max_configs(r: *const UdReport) -> usize {
    r.as_ref().map_or(0, |r| r.report.max_configs)
}

/// # Safety
/// `r` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ud_report_events(r: *const UdReport) -> usize {
    r.as_ref().map_or(0, |r| r.report.events)
}

/// # Safety
/// `r` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ud_report_cutoffs(r: *const UdReport) -> usize {
    r.as_ref().map_or(0, |r| r.report.cutoffs)
}

/// # Safety
/// `r` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ud_report_avg_u_at_leaves(r: *const UdReport) -> f64 {
    r.as_ref().map_or(0.0, |r| r.report.avg_u_at_leaves)
}

/// # Safety
/// `r` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ud_report_time_ms(r: *const UdReport) -> f64 {
    r.as_ref().map_or(0.0, |r| r.report.time_ms)
}

/// Number of reached states where the error variable was set.
///
/// # Safety
/// `r` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ud_report_assertion_hits(r: *const UdReport) -> usize {
    r.as_ref().map_or(0, |r| r.report.assertion_hits.len())
}

/// Statistics as a JSON object; free with `ud_string_free`. NULL for a NULL report.
///
/// # Safety
/// `r` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ud_report_stats_json(r: *const UdReport) -> *mut c_char {
    match r.as_ref() {
        Some(r) => into_c_string(r.report.stats_json().to_string()),
        None => ptr::null_mut(),
    }
}
