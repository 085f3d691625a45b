//! C interface to the vsched library.
//!
//! Objects are opaque handles created by `vsched_*_new` style functions and
//! released with the matching `vsched_*_free`. Every fallible call returns a
//! [`VschedStatus`]; on failure [`vsched_last_error`] describes the problem.
//! Strings handed out by the library are released with [`vsched_string_free`].
//! Indices across this interface count from 0.

use std::cell::RefCell;
use std::collections::HashMap;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;
use std::time::Duration;

use vsched::hls::{join_playlists, HlsError, MasterPlaylist, MediaPlaylist};
use vsched::io::{read_scenario_csv, read_schedule_csv, write_schedule_csv};
use vsched::schedulers::{run_scheduler, ExactError, GreedyConfig, SchedulerKind, SchedulerOptions, SolverBudget};
use vsched::{compute_metrics, validate_schedule, ObjectiveWeights, QualityLadder, Scenario, Schedule};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VschedStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidArgument = 2,
    ParseError = 3,
    Infeasible = 4,
    BudgetExceeded = 5,
    OutOfRange = 6,
    InvalidSchedule = 7,
    Internal = 99,
}

pub const VSCHED_BUFFER_FIRST: u32 = 0;
pub const VSCHED_QUALITY_FIRST: u32 = 1;
pub const VSCHED_FILL: u32 = 2;
pub const VSCHED_EXACT: u32 = 3;

pub struct VschedLadder(QualityLadder);

pub struct VschedScenario(Scenario);

pub struct VschedSchedule(Schedule);

/// Scheduler settings. A zero `max_nodes` or `time_limit_seconds` leaves
/// that limit off.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct VschedOptions {
    pub lateness_weight: f64,
    pub quality_weight: f64,
    pub buffer_weight: f64,
    pub max_buffer_segments: u32,
    pub max_nodes: u64,
    pub time_limit_seconds: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct VschedMetrics {
    pub avg_quality_mb: f64,
    pub avg_lateness_seconds: f64,
    pub avg_buffer_segments: f64,
    pub objective_value: f64,
}

/// A segment's download slot and quality level, or `placed == false` when
/// the segment was never downloaded.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct VschedPlacement {
    pub placed: bool,
    pub slot: usize,
    pub quality: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Error(VschedStatus, String);

impl Error {
    fn new(status: VschedStatus, message: impl ToString) -> Self {
        Error(status, message.to_string())
    }
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Error>) -> VschedStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => VschedStatus::Ok,
        Ok(Err(Error(status, message))) => {
            set_last_error(message);
            status
        }
        Err(_) => {
            set_last_error("internal error".into());
            VschedStatus::Internal
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, name: &str) -> Result<&'a T, Error> {
    p.as_ref()
        .ok_or_else(|| Error::new(VschedStatus::NullArgument, format!("`{name}` is null")))
}

unsafe fn text<'a>(p: *const c_char, name: &str) -> Result<&'a str, Error> {
    if p.is_null() {
        return Err(Error::new(VschedStatus::NullArgument, format!("`{name}` is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Error::new(VschedStatus::InvalidArgument, format!("`{name}` is not UTF-8")))
}

unsafe fn array<'a, T>(p: *const T, len: usize, name: &str) -> Result<&'a [T], Error> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Error::new(VschedStatus::NullArgument, format!("`{name}` is null")));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn put<T>(out: *mut T, value: T) -> Result<(), Error> {
    if out.is_null() {
        return Err(Error::new(VschedStatus::NullArgument, "output pointer is null"));
    }
    out.write(value);
    Ok(())
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Result<(), Error> {
    let c = CString::new(s).map_err(|e| Error::new(VschedStatus::Internal, e))?;
    put(out, c.into_raw())
}

fn invalid(e: impl ToString) -> Error {
    Error::new(VschedStatus::InvalidArgument, e)
}

fn parse_error(e: impl ToString) -> Error {
    Error::new(VschedStatus::ParseError, e)
}

/// Message for the most recent failure on the calling thread, or null. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn vsched_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `s` must be null or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn vsched_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Defaults: weights 440, 10 and 1, a three-segment greedy buffer, no solver
/// limits.
#[no_mangle]
pub extern "C" fn vsched_options_default() -> VschedOptions {
    let w = ObjectiveWeights::default();
    VschedOptions {
        lateness_weight: w.lateness(),
        quality_weight: w.quality(),
        buffer_weight: w.buffer(),
        max_buffer_segments: GreedyConfig::default().max_buffer_segments() as u32,
        max_nodes: 0,
        time_limit_seconds: 0.0,
    }
}

/// The reference ladder: 1.77, 3.69 and 4.51 MB.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn vsched_ladder_reference(out: *mut *mut VschedLadder) -> VschedStatus {
    guard(|| put(out, Box::into_raw(Box::new(VschedLadder(QualityLadder::reference())))))
}

/// Builds a ladder from `len` strictly increasing segment sizes and their
/// bandwidths. Labels default to `q0`, `q1`, ...
///
/// # Safety
/// `sizes_mb` and `bandwidths_bps` must point to `len` readable elements and
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn vsched_ladder_new(
    sizes_mb: *const f64,
    bandwidths_bps: *const u64,
    len: usize,
    out: *mut *mut VschedLadder,
) -> VschedStatus {
    guard(|| {
        let sizes = array(sizes_mb, len, "sizes_mb")?;
        let bandwidths = array(bandwidths_bps, len, "bandwidths_bps")?;
        let ladder = QualityLadder::from_columns(sizes, bandwidths, None).map_err(invalid)?;
        put(out, Box::into_raw(Box::new(VschedLadder(ladder))))
    })
}

/// # Safety
/// `ladder` must be null or a handle from this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn vsched_ladder_free(ladder: *mut VschedLadder) {
    if !ladder.is_null() {
        drop(Box::from_raw(ladder));
    }
}

/// Builds a scenario from a row-major `num_users` by `num_slots` matrix of
/// per-slot capacities in MB.
///
/// # Safety
/// `capacities_mb` must point to `num_users * num_slots` readable values and
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn vsched_scenario_new(
    capacities_mb: *const f64,
    num_users: usize,
    num_slots: usize,
    num_segments: usize,
    slot_seconds: f64,
    out: *mut *mut VschedScenario,
) -> VschedStatus {
    guard(|| {
        let len = num_users
            .checked_mul(num_slots)
            .ok_or_else(|| invalid("matrix too large"))?;
        let flat = array(capacities_mb, len, "capacities_mb")?;
        let rows = if num_slots == 0 {
            vec![Vec::new(); num_users]
        } else {
            flat.chunks(num_slots).map(<[f64]>::to_vec).collect()
        };
        let scenario = Scenario::new(rows, num_segments, slot_seconds).map_err(invalid)?;
        put(out, Box::into_raw(Box::new(VschedScenario(scenario))))
    })
}

/// Parses scenario CSV text (`user,slot,capacity_mb`, 1-based). A zero
/// `num_segments` means one segment per slot.
///
/// # Safety
/// `csv` must be a NUL-terminated string and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn vsched_scenario_from_csv(
    csv: *const c_char,
    num_segments: usize,
    slot_seconds: f64,
    out: *mut *mut VschedScenario,
) -> VschedStatus {
    guard(|| {
        let csv = text(csv, "csv")?;
        let segments = (num_segments > 0).then_some(num_segments);
        let scenario = read_scenario_csv(csv.as_bytes(), segments, slot_seconds).map_err(parse_error)?;
        put(out, Box::into_raw(Box::new(VschedScenario(scenario))))
    })
}

/// # Safety
/// `scenario` must be null or a handle from this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn vsched_scenario_free(scenario: *mut VschedScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

fn scheduler_kind(kind: u32) -> Result<SchedulerKind, Error> {
    match kind {
        VSCHED_BUFFER_FIRST => Ok(SchedulerKind::BufferFirst),
        VSCHED_QUALITY_FIRST => Ok(SchedulerKind::QualityFirst),
        VSCHED_FILL => Ok(SchedulerKind::Fill),
        VSCHED_EXACT => Ok(SchedulerKind::Exact),
        other => Err(invalid(format!("unknown scheduler {other}"))),
    }
}

fn weights(o: &VschedOptions) -> Result<ObjectiveWeights, Error> {
    ObjectiveWeights::new(o.lateness_weight, o.quality_weight, o.buffer_weight).map_err(invalid)
}

fn scheduler_options(o: &VschedOptions) -> Result<SchedulerOptions, Error> {
    let greedy = GreedyConfig::new(o.max_buffer_segments as usize)
        .ok_or_else(|| invalid("max_buffer_segments must be at least 1"))?;
    let limit = if o.time_limit_seconds == 0.0 {
        None
    } else {
        Some(Duration::try_from_secs_f64(o.time_limit_seconds).map_err(invalid)?)
    };
    let nodes = (o.max_nodes > 0).then_some(o.max_nodes);
    let budget = SolverBudget::new(nodes, limit).ok_or_else(|| invalid("solver budget must be positive"))?;
    Ok(SchedulerOptions {
        greedy,
        weights: weights(o)?,
        budget,
    })
}

/// Runs one of the `VSCHED_*` schedulers. `options` may be null for the
/// defaults. When the exact solver exhausts its budget with a complete
/// incumbent, that schedule is still written to `out` and the call returns
/// `BudgetExceeded`; otherwise `out` is left untouched on failure.
///
/// # Safety
/// `scenario` and `ladder` must be live handles, `options` null or readable,
/// and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn vsched_run_scheduler(
    scenario: *const VschedScenario,
    ladder: *const VschedLadder,
    scheduler: u32,
    options: *const VschedOptions,
    out: *mut *mut VschedSchedule,
) -> VschedStatus {
    guard(|| {
        let scenario = &deref(scenario, "scenario")?.0;
        let ladder = &deref(ladder, "ladder")?.0;
        let kind = scheduler_kind(scheduler)?;
        let options = match options.as_ref() {
            Some(o) => scheduler_options(o)?,
            None => SchedulerOptions::default(),
        };
        if out.is_null() {
            return Err(Error::new(VschedStatus::NullArgument, "`out` is null"));
        }
        match run_scheduler(kind, scenario, ladder, &options) {
            Ok(s) => put(out, Box::into_raw(Box::new(VschedSchedule(s)))),
            Err(e @ ExactError::Infeasible { .. }) => Err(Error::new(VschedStatus::Infeasible, e)),
            Err(ExactError::BudgetExceeded { incumbent }) => {
                if let Some(s) = incumbent {
                    put(out, Box::into_raw(Box::new(VschedSchedule(*s))))?;
                }
                Err(Error::new(VschedStatus::BudgetExceeded, "solver budget exhausted"))
            }
        }
    })
}

/// Parses schedule CSV text (`user,segment,slot,quality_index,quality_mb`).
///
/// # Safety
/// `csv` must be a NUL-terminated string and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn vsched_schedule_from_csv(csv: *const c_char, out: *mut *mut VschedSchedule) -> VschedStatus {
    guard(|| {
        let schedule = read_schedule_csv(text(csv, "csv")?.as_bytes()).map_err(parse_error)?;
        put(out, Box::into_raw(Box::new(VschedSchedule(schedule))))
    })
}

/// # Safety
/// `schedule` must be null or a handle from this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn vsched_schedule_free(schedule: *mut VschedSchedule) {
    if !schedule.is_null() {
        drop(Box::from_raw(schedule));
    }
}

/// # Safety
/// `schedule` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn vsched_schedule_num_users(schedule: *const VschedSchedule, out: *mut usize) -> VschedStatus {
    guard(|| put(out, deref(schedule, "schedule")?.0.users.len()))
}

/// # Safety
/// `schedule` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn vsched_schedule_num_segments(
    schedule: *const VschedSchedule,
    user: usize,
    out: *mut usize,
) -> VschedStatus {
    guard(|| {
        let s = &deref(schedule, "schedule")?.0;
        let us = s
            .users
            .get(user)
            .ok_or_else(|| Error::new(VschedStatus::OutOfRange, format!("no user {user}")))?;
        put(out, us.len())
    })
}

/// # Safety
/// `schedule` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn vsched_schedule_placement(
    schedule: *const VschedSchedule,
    user: usize,
    segment: usize,
    out: *mut VschedPlacement,
) -> VschedStatus {
    guard(|| {
        let s = &deref(schedule, "schedule")?.0;
        let p = s
            .users
            .get(user)
            .and_then(|us| us.placements.get(segment))
            .ok_or_else(|| {
                Error::new(
                    VschedStatus::OutOfRange,
                    format!("no segment {segment} for user {user}"),
                )
            })?;
        let placement = p.map_or_else(VschedPlacement::default, |p| VschedPlacement {
            placed: true,
            slot: p.slot,
            quality: p.quality,
        });
        put(out, placement)
    })
}

/// Validates `schedule` against `scenario` and computes its metrics.
/// `options` may be null for the default weights. Returns
/// `InvalidSchedule` with the first violation when the schedule breaks a
/// capacity or shape rule.
///
/// # Safety
/// All handles must be live, `options` null or readable, `out` valid for
/// writes.
#[no_mangle]
pub unsafe extern "C" fn vsched_schedule_metrics(
    schedule: *const VschedSchedule,
    scenario: *const VschedScenario,
    ladder: *const VschedLadder,
    options: *const VschedOptions,
    out: *mut VschedMetrics,
) -> VschedStatus {
    guard(|| {
        let schedule = &deref(schedule, "schedule")?.0;
        let scenario = &deref(scenario, "scenario")?.0;
        let ladder = &deref(ladder, "ladder")?.0;
        let w = match options.as_ref() {
            Some(o) => weights(o)?,
            None => ObjectiveWeights::default(),
        };
        if let Some(v) = validate_schedule(schedule, scenario, ladder).into_iter().next() {
            return Err(Error::new(VschedStatus::InvalidSchedule, v));
        }
        let m = compute_metrics(schedule, scenario, ladder, &w);
        put(
            out,
            VschedMetrics {
                avg_quality_mb: m.avg_quality_mb,
                avg_lateness_seconds: m.avg_lateness_seconds,
                avg_buffer_segments: m.avg_buffer_segments,
                objective_value: m.objective_value,
            },
        )
    })
}

/// Writes the schedule as CSV into a new string owned by the caller.
///
/// # Safety
/// Handles must be live and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn vsched_schedule_to_csv(
    schedule: *const VschedSchedule,
    ladder: *const VschedLadder,
    out: *mut *mut c_char,
) -> VschedStatus {
    guard(|| {
        let schedule = &deref(schedule, "schedule")?.0;
        let ladder = &deref(ladder, "ladder")?.0;
        let mut buf = Vec::new();
        write_schedule_csv(schedule, ladder, &mut buf).map_err(invalid)?;
        put_string(
            out,
            String::from_utf8(buf).map_err(|e| Error::new(VschedStatus::Internal, e))?,
        )
    })
}

/// Joins variant media playlists into the playlist served to `user` during
/// `slot`. `variants[i]` is the media playlist of the i-th variant listed in
/// `master`. The result is a new string owned by the caller.
///
/// # Safety
/// `master` and each of the `num_variants` entries of `variants` must be
/// NUL-terminated strings, `schedule` a live handle, `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn vsched_join_playlists(
    master: *const c_char,
    variants: *const *const c_char,
    num_variants: usize,
    schedule: *const VschedSchedule,
    user: usize,
    slot: usize,
    refresh_seconds: u64,
    out: *mut *mut c_char,
) -> VschedStatus {
    guard(|| {
        let master = MasterPlaylist::parse(text(master, "master")?).map_err(parse_error)?;
        let texts = array(variants, num_variants, "variants")?;
        if texts.len() != master.variants.len() {
            return Err(invalid(format!(
                "the master lists {} variants but {} playlists were given",
                master.variants.len(),
                texts.len()
            )));
        }
        let mut map = HashMap::new();
        for (v, &t) in master.variants.iter().zip(texts) {
            let playlist = MediaPlaylist::parse(text(t, "variants[i]")?).map_err(parse_error)?;
            map.insert(v.uri.clone(), playlist);
        }
        let schedule = &deref(schedule, "schedule")?.0;
        let joined = join_playlists(&master, &map, schedule, user, slot, refresh_seconds).map_err(|e| match e {
            HlsError::UserOutOfRange { .. } | HlsError::SlotOutOfRange { .. } => {
                Error::new(VschedStatus::OutOfRange, e)
            }
            _ => invalid(e),
        })?;
        put_string(out, joined.emit())
    })
}
