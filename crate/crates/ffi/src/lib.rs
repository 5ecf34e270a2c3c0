//! C ABI over `npc_reliability`.
//!
//! Configurations and reports are opaque heap handles released with their
//! `*_free` function. Every fallible call returns an [`NpcStatus`]; on failure
//! [`npc_last_error_message`] describes the error for the calling thread.
//! Panics are caught at the boundary and reported as [`NpcStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use npc_reliability::config::RunConfig;
use npc_reliability::losses::DeviceRole;
use npc_reliability::pipeline::{self, Mode, ReliabilityReport};
use npc_reliability::reliability::{self, PartType};
use npc_reliability::{report, Error, ErrorClass, StrategyId};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NpcStatus {
    Ok = 0,
    /// Null pointer or invalid UTF-8. Enum arguments must hold a declared value.
    InvalidArgument = 1,
    ConfigError = 2,
    NumericError = 3,
    IoError = 4,
    /// A panic was caught; the handle arguments should be considered poisoned.
    Panic = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NpcStrategy {
    Spwm = 0,
    Thipwm = 1,
    Svpwm = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NpcMode {
    /// Configured per-strategy factor overrides replace computed factors.
    PaperFactors = 0,
    Model = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NpcPartType {
    Mosfet = 0,
    Diode = 1,
    Capacitor = 2,
}

/// Device positions of one leg, in the order S1–S4, D1–D6.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NpcDeviceRole {
    S1 = 0,
    S2,
    S3,
    S4,
    D1,
    D2,
    D3,
    D4,
    D5,
    D6,
}

/// Operating point in configuration units.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NpcOperatingPoint {
    pub modulation_index: f64,
    pub power_factor: f64,
    pub peak_current_a: f64,
    pub output_frequency_hz: f64,
    pub carrier_frequency_hz: f64,
    pub dc_link_voltage_v: f64,
    pub ambient_temperature_degc: f64,
}

/// Loss, temperatures and failure rate (per 10^6 h) of one device.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NpcDeviceResult {
    pub p_cond_w: f64,
    pub p_sw_w: f64,
    pub total_w: f64,
    pub t_case_degc: f64,
    pub t_junction_degc: f64,
    pub lambda_per_1e6_h: f64,
}

/// Opaque run configuration.
pub struct NpcConfig(RunConfig);

/// Opaque evaluation report.
pub struct NpcReport(ReliabilityReport);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: NpcStatus, msg: impl Into<String>) -> NpcStatus {
    set_error(msg.into());
    status
}

fn from_error(e: Error) -> NpcStatus {
    let status = match e.class() {
        ErrorClass::Config => NpcStatus::ConfigError,
        ErrorClass::Numeric => NpcStatus::NumericError,
        ErrorClass::Io => NpcStatus::IoError,
    };
    fail(status, e.to_string())
}

/// Runs `f`, converting panics and library errors into status codes.
fn guard(f: impl FnOnce() -> Result<(), NpcStatus>) -> NpcStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => NpcStatus::Ok,
        Ok(Err(s)) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            fail(NpcStatus::Panic, format!("panic: {msg}"))
        }
    }
}

trait IntoStatus<T> {
    fn status(self) -> Result<T, NpcStatus>;
}

impl<T> IntoStatus<T> for npc_reliability::Result<T> {
    fn status(self) -> Result<T, NpcStatus> {
        self.map_err(from_error)
    }
}

unsafe fn non_null<'a, T>(p: *const T, what: &str) -> Result<&'a T, NpcStatus> {
    p.as_ref().ok_or_else(|| fail(NpcStatus::InvalidArgument, format!("{what} is NULL")))
}

unsafe fn non_null_mut<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, NpcStatus> {
    p.as_mut().ok_or_else(|| fail(NpcStatus::InvalidArgument, format!("{what} is NULL")))
}

unsafe fn utf8<'a>(p: *const c_char, what: &str) -> Result<&'a str, NpcStatus> {
    if p.is_null() {
        return Err(fail(NpcStatus::InvalidArgument, format!("{what} is NULL")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(NpcStatus::InvalidArgument, format!("{what} is not valid UTF-8")))
}

fn strategy(s: NpcStrategy) -> StrategyId {
    match s {
        NpcStrategy::Spwm => StrategyId::Spwm,
        NpcStrategy::Thipwm => StrategyId::Thipwm,
        NpcStrategy::Svpwm => StrategyId::Svpwm,
    }
}

fn mode(m: NpcMode) -> Mode {
    match m {
        NpcMode::PaperFactors => Mode::PaperFactors,
        NpcMode::Model => Mode::Model,
    }
}

fn boxed_config(cfg: RunConfig, out: &mut *mut NpcConfig) -> Result<(), NpcStatus> {
    cfg.validate().status()?;
    *out = Box::into_raw(Box::new(NpcConfig(cfg)));
    Ok(())
}

/// Creates the built-in default configuration.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for a handle.
#[no_mangle]
pub unsafe extern "C" fn npc_config_default(out: *mut *mut NpcConfig) -> NpcStatus {
    guard(|| boxed_config(RunConfig::default(), non_null_mut(out, "out")?))
}

/// Parses a configuration from NUL-terminated TOML text.
///
/// # Safety
/// `toml` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn npc_config_from_toml(toml: *const c_char, out: *mut *mut NpcConfig) -> NpcStatus {
    guard(|| {
        let out = non_null_mut(out, "out")?;
        let cfg = RunConfig::from_toml(utf8(toml, "toml")?).status()?;
        boxed_config(cfg, out)
    })
}

/// Loads a configuration file; relative paths inside it resolve against its directory.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn npc_config_load(path: *const c_char, out: *mut *mut NpcConfig) -> NpcStatus {
    guard(|| {
        let out = non_null_mut(out, "out")?;
        let cfg = RunConfig::load(Path::new(utf8(path, "path")?)).status()?;
        boxed_config(cfg, out)
    })
}

/// Releases a configuration. NULL is ignored.
///
/// # Safety
/// `cfg` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn npc_config_free(cfg: *mut NpcConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Reads the configured operating point.
///
/// # Safety
/// `cfg` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn npc_config_get_operating_point(
    cfg: *const NpcConfig,
    out: *mut NpcOperatingPoint,
) -> NpcStatus {
    guard(|| {
        let op = &non_null(cfg, "cfg")?.0.operating_point;
        *non_null_mut(out, "out")? = NpcOperatingPoint {
            modulation_index: op.modulation_index,
            power_factor: op.power_factor,
            peak_current_a: op.peak_current,
            output_frequency_hz: op.output_frequency,
            carrier_frequency_hz: op.carrier_frequency,
            dc_link_voltage_v: op.dc_link_voltage,
            ambient_temperature_degc: op.ambient_temperature,
        };
        Ok(())
    })
}

/// Replaces the operating point. An invalid point leaves the configuration unchanged.
///
/// # Safety
/// `cfg` must be a live handle and `op` readable.
#[no_mangle]
pub unsafe extern "C" fn npc_config_set_operating_point(
    cfg: *mut NpcConfig,
    op: *const NpcOperatingPoint,
) -> NpcStatus {
    guard(|| {
        let cfg = non_null_mut(cfg, "cfg")?;
        let op = non_null(op, "op")?;
        let mut next = cfg.0.clone();
        let p = &mut next.operating_point;
        p.modulation_index = op.modulation_index;
        p.power_factor = op.power_factor;
        p.peak_current = op.peak_current_a;
        p.output_frequency = op.output_frequency_hz;
        p.carrier_frequency = op.carrier_frequency_hz;
        p.dc_link_voltage = op.dc_link_voltage_v;
        p.ambient_temperature = op.ambient_temperature_degc;
        next.validate().status()?;
        cfg.0 = next;
        Ok(())
    })
}

/// Evaluates one strategy.
///
/// # Safety
/// `cfg` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn npc_evaluate(
    cfg: *const NpcConfig,
    strategy_id: NpcStrategy,
    eval_mode: NpcMode,
    out: *mut *mut NpcReport,
) -> NpcStatus {
    guard(|| {
        let cfg = &non_null(cfg, "cfg")?.0;
        let out = non_null_mut(out, "out")?;
        let r = pipeline::evaluate(cfg, &[strategy(strategy_id)], mode(eval_mode)).status()?;
        *out = Box::into_raw(Box::new(NpcReport(r)));
        Ok(())
    })
}

/// Evaluates all three strategies with the MTTF comparison.
///
/// # Safety
/// `cfg` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn npc_compare(cfg: *const NpcConfig, eval_mode: NpcMode, out: *mut *mut NpcReport) -> NpcStatus {
    guard(|| {
        let cfg = &non_null(cfg, "cfg")?.0;
        let out = non_null_mut(out, "out")?;
        let r = pipeline::compare_strategies(cfg, mode(eval_mode)).status()?;
        *out = Box::into_raw(Box::new(NpcReport(r)));
        Ok(())
    })
}

/// Releases a report. NULL is ignored.
///
/// # Safety
/// `report` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn npc_report_free(report: *mut NpcReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

unsafe fn strategy_report<'a>(
    report: *const NpcReport,
    s: NpcStrategy,
) -> Result<&'a pipeline::StrategyReport, NpcStatus> {
    let id = strategy(s);
    non_null(report, "report")?
        .0
        .strategy(id)
        .ok_or_else(|| fail(NpcStatus::InvalidArgument, format!("report does not contain {id}")))
}

/// Inverter failure rate of `strategy` in failures per 10^6 hours.
///
/// # Safety
/// `report` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn npc_report_lambda_total(
    report: *const NpcReport,
    strategy_id: NpcStrategy,
    out: *mut f64,
) -> NpcStatus {
    guard(|| {
        *non_null_mut(out, "out")? = strategy_report(report, strategy_id)?.lambda_total;
        Ok(())
    })
}

/// Inverter MTTF of `strategy` in hours.
///
/// # Safety
/// `report` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn npc_report_mttf_hours(
    report: *const NpcReport,
    strategy_id: NpcStrategy,
    out: *mut f64,
) -> NpcStatus {
    guard(|| {
        *non_null_mut(out, "out")? = strategy_report(report, strategy_id)?.mttf_hours;
        Ok(())
    })
}

/// Results for one device of leg A.
///
/// # Safety
/// `report` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn npc_report_device(
    report: *const NpcReport,
    strategy_id: NpcStrategy,
    role: NpcDeviceRole,
    out: *mut NpcDeviceResult,
) -> NpcStatus {
    guard(|| {
        let out = non_null_mut(out, "out")?;
        let d = strategy_report(report, strategy_id)?.device(DeviceRole::ALL[role as usize]);
        *out = NpcDeviceResult {
            p_cond_w: d.losses.p_cond,
            p_sw_w: d.losses.p_sw,
            total_w: d.losses.total,
            t_case_degc: d.temperatures.t_case,
            t_junction_degc: d.temperatures.t_junction,
            lambda_per_1e6_h: d.rate,
        };
        Ok(())
    })
}

/// Serialises the report as JSON. Free the string with [`npc_string_free`].
///
/// # Safety
/// `report` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn npc_report_to_json(report: *const NpcReport, out: *mut *mut c_char) -> NpcStatus {
    guard(|| {
        let out = non_null_mut(out, "out")?;
        let text = report::to_json(&non_null(report, "report")?.0).status()?;
        let c = CString::new(text).map_err(|_| fail(NpcStatus::NumericError, "JSON contains NUL"))?;
        *out = c.into_raw();
        Ok(())
    })
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must be NULL or a string from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn npc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message of the last failed call on this thread, or NULL. The pointer
/// stays valid until the next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn npc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Temperature factor of a part at `temperature_degc`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn npc_pi_t(part: NpcPartType, temperature_degc: f64, out: *mut f64) -> NpcStatus {
    guard(|| {
        let out = non_null_mut(out, "out")?;
        if !temperature_degc.is_finite() {
            return Err(fail(NpcStatus::InvalidArgument, "temperature is not finite"));
        }
        let p = match part {
            NpcPartType::Mosfet => PartType::Mosfet,
            NpcPartType::Diode => PartType::Diode,
            NpcPartType::Capacitor => PartType::Capacitor,
        };
        *out = reliability::pi_t(p, temperature_degc);
        Ok(())
    })
}

/// MTTF in hours of a series system with failure rate `lambda_per_1e6_h`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn npc_mttf_hours(lambda_per_1e6_h: f64, out: *mut f64) -> NpcStatus {
    guard(|| {
        let out = non_null_mut(out, "out")?;
        *out = reliability::mttf(lambda_per_1e6_h).status()?;
        Ok(())
    })
}
