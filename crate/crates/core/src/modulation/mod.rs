//! Modulating functions, switching states and effective duty cycles of a
//! three-level NPC leg.
//!
//! Angle convention used throughout the crate: the load current of phase A is
//! `i(θ) = I·sin θ` and the phase-A reference is evaluated at `θ + φ`, so the
//! voltage leads the current by the lag angle `φ`. All modulating functions are
//! normalised to `Vdc/2`; a value of `±1` selects the positive/negative rail for
//! the whole carrier period.

pub mod svpwm;

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use svpwm::{RegionExpr, RegionId, SvpwmBand, SvpwmRegionTable};

/// Modulation strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StrategyId {
    Spwm,
    Thipwm,
    Svpwm,
}

impl StrategyId {
    pub const ALL: [StrategyId; 3] = [StrategyId::Spwm, StrategyId::Thipwm, StrategyId::Svpwm];

    pub fn name(self) -> &'static str {
        match self {
            StrategyId::Spwm => "SPWM",
            StrategyId::Thipwm => "THIPWM",
            StrategyId::Svpwm => "SVPWM",
        }
    }

    pub fn key(self) -> &'static str {
        match self {
            StrategyId::Spwm => "spwm",
            StrategyId::Thipwm => "thipwm",
            StrategyId::Svpwm => "svpwm",
        }
    }
}

impl fmt::Display for StrategyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StrategyId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "spwm" => Ok(StrategyId::Spwm),
            "thipwm" | "thi" => Ok(StrategyId::Thipwm),
            "svpwm" | "svm" => Ok(StrategyId::Svpwm),
            other => Err(Error::config(format!("unknown modulation strategy `{other}`"))),
        }
    }
}

/// Electrical and usage state of the inverter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatingPoint {
    /// Modulation index, `0 < M ≤ 1`.
    pub modulation_index: f64,
    /// Current lag behind the phase voltage, rad.
    pub phase_lag: f64,
    /// Peak load current, A.
    pub peak_current: f64,
    /// Fundamental frequency, Hz.
    pub output_frequency: f64,
    /// Carrier (sampling) frequency, Hz.
    pub carrier_frequency: f64,
    /// DC-link voltage, V.
    pub dc_link_voltage: f64,
    /// Ambient temperature, °C.
    pub ambient_temperature: f64,
}

impl OperatingPoint {
    pub fn validate(&self) -> Result<()> {
        check_modulation_index(self.modulation_index)?;
        if !(0.0..PI).contains(&self.phase_lag) {
            return Err(Error::domain(format!(
                "phase lag must lie in [0, π) rad, got {}",
                self.phase_lag
            )));
        }
        // A zero-current point is admitted so an idle inverter can be evaluated.
        if !(self.peak_current >= 0.0 && self.peak_current.is_finite()) {
            return Err(Error::domain(format!(
                "peak current must be finite and non-negative, got {}",
                self.peak_current
            )));
        }
        if !(self.output_frequency > 0.0) {
            return Err(Error::domain(format!(
                "output frequency must be positive, got {}",
                self.output_frequency
            )));
        }
        if !(self.carrier_frequency >= 10.0 * self.output_frequency) {
            return Err(Error::domain(format!(
                "carrier frequency {} Hz must be at least ten times the output frequency {} Hz",
                self.carrier_frequency, self.output_frequency
            )));
        }
        if !(self.dc_link_voltage > 0.0) {
            return Err(Error::domain(format!(
                "DC-link voltage must be positive, got {}",
                self.dc_link_voltage
            )));
        }
        if !(self.ambient_temperature > -273.15) {
            return Err(Error::domain(format!(
                "ambient temperature {} °C is below absolute zero",
                self.ambient_temperature
            )));
        }
        Ok(())
    }

    pub fn power_factor(&self) -> f64 {
        self.phase_lag.cos()
    }

    /// Carrier periods in one fundamental period.
    pub fn pulse_number(&self) -> f64 {
        self.carrier_frequency / self.output_frequency
    }

    pub fn with_modulation_index(mut self, m: f64) -> Self {
        self.modulation_index = m;
        self
    }

    pub fn with_phase_lag(mut self, phi: f64) -> Self {
        self.phase_lag = phi;
        self
    }

    pub fn with_peak_current(mut self, amps: f64) -> Self {
        self.peak_current = amps;
        self
    }
}

pub(crate) fn check_modulation_index(m: f64) -> Result<()> {
    if m > 0.0 && m <= 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("modulation index must lie in (0, 1], got {m}")))
    }
}

/// One of the three switching states of an NPC leg.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SwitchingState {
    /// S1, S2 on: output `+Vdc/2`.
    Positive = 1,
    /// S2, S3 on: output clamped to the neutral point.
    Zero = 2,
    /// S3, S4 on: output `−Vdc/2`.
    Negative = 3,
}

impl SwitchingState {
    pub const ALL: [SwitchingState; 3] =
        [SwitchingState::Positive, SwitchingState::Zero, SwitchingState::Negative];

    /// Gate vector `[S1, S2, S3, S4]`.
    pub fn gates(self) -> [bool; 4] {
        match self {
            SwitchingState::Positive => [true, true, false, false],
            SwitchingState::Zero => [false, true, true, false],
            SwitchingState::Negative => [false, false, true, true],
        }
    }

    pub fn from_gates(gates: [bool; 4]) -> Option<Self> {
        Self::ALL.into_iter().find(|s| s.gates() == gates)
    }

    /// Output level in units of `Vdc/2`.
    pub fn output_level(self) -> f64 {
        match self {
            SwitchingState::Positive => 1.0,
            SwitchingState::Zero => 0.0,
            SwitchingState::Negative => -1.0,
        }
    }

    pub fn number(self) -> u8 {
        self as u8
    }
}

/// Effective duty cycles of the switching states over one carrier period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DutyCycleSet {
    pub positive: f64,
    /// Zero state while the reference is non-negative.
    pub zero_positive: f64,
    /// Zero state while the reference is negative.
    pub zero_negative: f64,
    pub negative: f64,
}

impl DutyCycleSet {
    pub fn zero(&self) -> f64 {
        self.zero_positive + self.zero_negative
    }
}

/// Duty cycles for a modulating-function value.
pub fn duty_cycles(mf: f64) -> Result<DutyCycleSet> {
    if !(mf.abs() <= 1.0) {
        return Err(Error::domain(format!(
            "modulating function {mf} outside [-1, 1]; overmodulation is not supported"
        )));
    }
    Ok(if mf >= 0.0 {
        DutyCycleSet {
            positive: mf,
            zero_positive: 1.0 - mf,
            zero_negative: 0.0,
            negative: 0.0,
        }
    } else {
        DutyCycleSet {
            positive: 0.0,
            zero_positive: 0.0,
            zero_negative: 1.0 + mf,
            negative: -mf,
        }
    })
}

/// Phase-A modulating function at load-current angle `theta` with lag `phi`.
///
/// The reference is evaluated at the voltage angle `theta + phi`.
pub fn modulating_function(strategy: StrategyId, m: f64, theta: f64, phi: f64) -> Result<f64> {
    check_modulation_index(m)?;
    Ok(reference(strategy, m, theta + phi))
}

/// Reference value at voltage angle `x` (sine convention). Assumes a validated `m`.
pub(crate) fn reference(strategy: StrategyId, m: f64, x: f64) -> f64 {
    match strategy {
        StrategyId::Spwm => m * x.sin(),
        StrategyId::Thipwm => {
            2.0 * m / 3f64.sqrt() * (x.sin() + (3.0 * x).sin() / 6.0)
        }
        // The SVPWM tables are written against the cosine axis of phase A.
        StrategyId::Svpwm => svpwm::phase_reference(m, x - FRAC_PI_2),
    }
}

/// A modulating function with its index validated once, for tight sampling loops.
#[derive(Debug, Clone, Copy)]
pub struct Modulator {
    strategy: StrategyId,
    m: f64,
}

impl Modulator {
    pub fn new(strategy: StrategyId, m: f64) -> Result<Self> {
        check_modulation_index(m)?;
        Ok(Self { strategy, m })
    }

    pub fn strategy(&self) -> StrategyId {
        self.strategy
    }

    /// Reference at voltage angle `x`.
    pub fn at_voltage_angle(&self, x: f64) -> f64 {
        reference(self.strategy, self.m, x)
    }
}

/// Instantaneous phase-A load current at voltage angle `voltage_angle`.
///
/// Amplitude scales with the modulation index; the current lags the voltage by `phi`.
pub fn load_current(m: f64, voltage_angle: f64, phi: f64, peak_current: f64) -> f64 {
    m * peak_current * (voltage_angle - phi).sin()
}
