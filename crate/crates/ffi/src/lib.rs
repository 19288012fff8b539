//! C ABI for the blindqkd simulator.
//!
//! Handles are opaque pointers created by `*_new`/`*_run` and released by the
//! matching `*_free`. Every fallible call returns a [`BqStatus`]; on failure a
//! description is available from [`bq_last_error`] on the same thread.
#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use blindqkd::harness::{enumerate_exhaustive, SimConfig, Simulator, StrategyKind};
use blindqkd::polarization::{born_probability, Angle, MeasurementBasis, PolarizationState};
use blindqkd::protocol::{AngleSource, Protocol, RoundRecord};
use blindqkd::report::SimReport;
use blindqkd::Bit;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BqStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    SimulationError = 3,
    /// The requested statistic is undefined for this run (e.g. no guesses).
    Undefined = 4,
    IoError = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BqAttack {
    None = 0,
    Passive = 1,
    Impersonation = 2,
    InterceptResend = 3,
}

impl From<BqAttack> for StrategyKind {
    fn from(a: BqAttack) -> Self {
        match a {
            BqAttack::None => StrategyKind::None,
            BqAttack::Passive => StrategyKind::Passive,
            BqAttack::Impersonation => StrategyKind::impersonation(),
            BqAttack::InterceptResend => StrategyKind::intercept_resend(),
        }
    }
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BqConfig {
    /// 1 or 2.
    pub protocol: u8,
    pub attack: BqAttack,
    pub rounds: u64,
    pub seed: u64,
    /// 0 for continuous angles, otherwise K for the grid `jπ/K`.
    pub grid: u32,
    pub threshold: f64,
}

/// One round. Bits are 0/1, or -1 when absent.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BqRoundRecord {
    pub round: u64,
    pub protocol: u8,
    pub k_alice: i8,
    pub k_bob: i8,
    pub s: i8,
    pub b: i8,
    pub l: i8,
    pub eve_guess: i8,
    pub eve_active: bool,
    pub aborted: bool,
    pub bob_measurement_random: bool,
    pub phi: f64,
    pub theta1: f64,
    /// NaN for protocol 1.
    pub theta2: f64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct BqVerdictSummary {
    pub total_cases: u64,
    pub failed_cases: u64,
}

pub struct BqSimulator {
    inner: Simulator,
}

pub struct BqReport {
    inner: SimReport,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let s = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(s));
}

fn fail(status: BqStatus, msg: impl Into<String>) -> BqStatus {
    set_error(msg);
    status
}

fn guard<F: FnOnce() -> BqStatus>(f: F) -> BqStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(BqStatus::Panic, "panic inside blindqkd"),
    }
}

fn bit(b: Option<Bit>) -> i8 {
    b.map_or(-1, |v| v.value() as i8)
}

impl From<&RoundRecord> for BqRoundRecord {
    fn from(r: &RoundRecord) -> Self {
        BqRoundRecord {
            round: r.round,
            protocol: r.protocol.number(),
            k_alice: r.k_alice.value() as i8,
            k_bob: bit(r.k_bob),
            s: bit(r.s),
            b: bit(r.b),
            l: bit(r.l),
            eve_guess: bit(r.eve_guess),
            eve_active: r.eve_active,
            aborted: r.aborted.is_some(),
            bob_measurement_random: r.bob_measurement_random,
            phi: r.phi.radians(),
            theta1: r.theta.first().map_or(f64::NAN, |a| a.radians()),
            theta2: r.theta.get(1).map_or(f64::NAN, |a| a.radians()),
        }
    }
}

fn to_config(c: &BqConfig) -> Result<SimConfig, String> {
    let protocol = Protocol::try_from(c.protocol)?;
    let angles = match c.grid {
        0 => AngleSource::Continuous,
        k => AngleSource::Grid(k),
    };
    let config = SimConfig::new(protocol, c.attack.into(), c.rounds, c.seed)
        .with_angles(angles)
        .with_threshold(c.threshold);
    config.validate().map_err(|e| e.to_string())?;
    Ok(config)
}

/// Message for the last failed call on this thread, or NULL. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn bq_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

#[no_mangle]
pub extern "C" fn bq_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Protocol 1, no attack, 10000 rounds, seed 0, continuous angles, threshold 0.05.
#[no_mangle]
pub unsafe extern "C" fn bq_config_default(out: *mut BqConfig) -> BqStatus {
    if out.is_null() {
        return fail(BqStatus::NullPointer, "out is null");
    }
    *out = BqConfig {
        protocol: 1,
        attack: BqAttack::None,
        rounds: 10_000,
        seed: 0,
        grid: 0,
        threshold: blindqkd::analysis::DEFAULT_THRESHOLD,
    };
    BqStatus::Ok
}

#[no_mangle]
pub unsafe extern "C" fn bq_simulator_new(
    config: *const BqConfig,
    out: *mut *mut BqSimulator,
) -> BqStatus {
    guard(|| {
        if config.is_null() || out.is_null() {
            return fail(BqStatus::NullPointer, "config or out is null");
        }
        let config = match to_config(&*config) {
            Ok(c) => c,
            Err(e) => return fail(BqStatus::InvalidArgument, e),
        };
        match Simulator::new(config) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(BqSimulator { inner }));
                BqStatus::Ok
            }
            Err(e) => fail(BqStatus::SimulationError, e.to_string()),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn bq_simulator_free(sim: *mut BqSimulator) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

#[no_mangle]
pub unsafe extern "C" fn bq_simulator_run_round(
    sim: *const BqSimulator,
    round: u64,
    out: *mut BqRoundRecord,
) -> BqStatus {
    guard(|| {
        if sim.is_null() || out.is_null() {
            return fail(BqStatus::NullPointer, "sim or out is null");
        }
        match (*sim).inner.run_round(round) {
            Ok(r) => {
                *out = BqRoundRecord::from(&r);
                BqStatus::Ok
            }
            Err(e) => fail(BqStatus::SimulationError, e.to_string()),
        }
    })
}

/// Run every configured round. `threads == 0` uses the default pool.
#[no_mangle]
pub unsafe extern "C" fn bq_simulator_run(
    sim: *const BqSimulator,
    threads: u32,
    out: *mut *mut BqReport,
) -> BqStatus {
    guard(|| {
        if sim.is_null() || out.is_null() {
            return fail(BqStatus::NullPointer, "sim or out is null");
        }
        let sim = &(*sim).inner;
        let result = match threads {
            0 => sim.run(),
            n => sim.run_with_threads(n as usize),
        };
        match result {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(BqReport { inner }));
                BqStatus::Ok
            }
            Err(e) => fail(BqStatus::SimulationError, e.to_string()),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn bq_report_free(report: *mut BqReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

unsafe fn report_field<T>(
    report: *const BqReport,
    out: *mut T,
    get: impl FnOnce(&SimReport) -> Option<T>,
) -> BqStatus {
    if report.is_null() || out.is_null() {
        return fail(BqStatus::NullPointer, "report or out is null");
    }
    match get(&(*report).inner) {
        Some(v) => {
            *out = v;
            BqStatus::Ok
        }
        None => fail(BqStatus::Undefined, "statistic undefined for this run"),
    }
}

#[no_mangle]
pub unsafe extern "C" fn bq_report_counts(
    report: *const BqReport,
    rounds: *mut u64,
    aborted: *mut u64,
) -> BqStatus {
    if aborted.is_null() {
        return fail(BqStatus::NullPointer, "aborted is null");
    }
    let status = report_field(report, rounds, |r| Some(r.rounds));
    if status == BqStatus::Ok {
        *aborted = (*report).inner.aborted;
    }
    status
}

#[no_mangle]
pub unsafe extern "C" fn bq_report_qber(report: *const BqReport, out: *mut f64) -> BqStatus {
    report_field(report, out, |r| Some(r.qber))
}

/// `BQ_STATUS_UNDEFINED` when the strategy made no guesses.
#[no_mangle]
pub unsafe extern "C" fn bq_report_eve_accuracy(
    report: *const BqReport,
    out: *mut f64,
) -> BqStatus {
    report_field(report, out, |r| r.eve_accuracy)
}

#[no_mangle]
pub unsafe extern "C" fn bq_report_mi_ab(report: *const BqReport, out: *mut f64) -> BqStatus {
    report_field(report, out, |r| Some(r.mi_ab))
}

#[no_mangle]
pub unsafe extern "C" fn bq_report_mi_ae(report: *const BqReport, out: *mut f64) -> BqStatus {
    report_field(report, out, |r| r.mi_ae)
}

#[no_mangle]
pub unsafe extern "C" fn bq_report_detected(report: *const BqReport, out: *mut bool) -> BqStatus {
    report_field(report, out, |r| Some(r.detected))
}

/// The JSON report as a new string; release it with [`bq_string_free`]. NULL on failure.
#[no_mangle]
pub unsafe extern "C" fn bq_report_to_json(report: *const BqReport) -> *mut c_char {
    if report.is_null() {
        set_error("report is null");
        return ptr::null_mut();
    }
    match (*report).inner.to_json().map(CString::new) {
        Ok(Ok(s)) => s.into_raw(),
        Ok(Err(e)) => {
            set_error(e.to_string());
            ptr::null_mut()
        }
        Err(e) => {
            set_error(e.to_string());
            ptr::null_mut()
        }
    }
}

#[no_mangle]
pub unsafe extern "C" fn bq_report_write_json(
    report: *const BqReport,
    path: *const c_char,
) -> BqStatus {
    guard(|| {
        if report.is_null() || path.is_null() {
            return fail(BqStatus::NullPointer, "report or path is null");
        }
        let path = match CStr::from_ptr(path).to_str() {
            Ok(p) => p,
            Err(_) => return fail(BqStatus::InvalidArgument, "path is not UTF-8"),
        };
        match (*report).inner.write_json(Path::new(path)) {
            Ok(()) => BqStatus::Ok,
            Err(e) => fail(BqStatus::IoError, e.to_string()),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn bq_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Exhaustive oracle over every binary parameter and every grid angle `jπ/grid`.
#[no_mangle]
pub unsafe extern "C" fn bq_enumerate(
    protocol: u8,
    attack: BqAttack,
    grid: u32,
    out: *mut BqVerdictSummary,
) -> BqStatus {
    guard(|| {
        if out.is_null() {
            return fail(BqStatus::NullPointer, "out is null");
        }
        let protocol = match Protocol::try_from(protocol) {
            Ok(p) => p,
            Err(e) => return fail(BqStatus::InvalidArgument, e),
        };
        match enumerate_exhaustive(protocol, &attack.into(), grid) {
            Ok(t) => {
                *out = BqVerdictSummary {
                    total_cases: t.total_cases,
                    failed_cases: t.failed_cases,
                };
                BqStatus::Ok
            }
            Err(e) => fail(BqStatus::InvalidArgument, e.to_string()),
        }
    })
}

/// Born probability of outcome 0 for a state at `state_angle` measured in the
/// basis whose outcome-0 vector is at `basis_angle`. NaN for non-finite input.
#[no_mangle]
pub extern "C" fn bq_born_probability(state_angle: f64, basis_angle: f64) -> f64 {
    match (Angle::new(state_angle), Angle::new(basis_angle)) {
        (Ok(s), Ok(b)) => born_probability(PolarizationState::new(s), MeasurementBasis::new(b)),
        _ => {
            set_error("non-finite angle");
            f64::NAN
        }
    }
}
