//! Part-stress failure rates (MIL-HDBK-217F), series aggregation, MTTF and
//! electrolytic-capacitor lifetime models.
//!
//! Failure rates are expressed in failures per 10⁶ hours throughout.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Part family; selects the temperature coefficient and the factor product.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PartType {
    Mosfet,
    Diode,
    Capacitor,
}

impl PartType {
    /// Activation coefficient `Ea/k` of the temperature factor, K.
    pub fn temperature_coefficient(self) -> f64 {
        match self {
            PartType::Mosfet => 1925.0,
            PartType::Diode => 3091.0,
            PartType::Capacitor => 4062.0,
        }
    }

    /// Factors entering the rate product, in addition to `λb`.
    pub fn required_factors(self) -> &'static [Factor] {
        use Factor::*;
        match self {
            PartType::Mosfet => &[T, A, Q, E],
            PartType::Diode => &[T, S, C, Q, E],
            PartType::Capacitor => &[T, Cp, V, Sr, Q, E],
        }
    }
}

/// Class used for contribution shares.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PartClass {
    Mosfet,
    FreewheelDiode,
    ClampDiode,
    Capacitor,
}

impl PartClass {
    pub const ALL: [PartClass; 4] =
        [PartClass::Mosfet, PartClass::FreewheelDiode, PartClass::ClampDiode, PartClass::Capacitor];

    pub fn part_type(self) -> PartType {
        match self {
            PartClass::Mosfet => PartType::Mosfet,
            PartClass::FreewheelDiode | PartClass::ClampDiode => PartType::Diode,
            PartClass::Capacitor => PartType::Capacitor,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PartClass::Mosfet => "mosfet",
            PartClass::FreewheelDiode => "freewheel_diode",
            PartClass::ClampDiode => "clamp_diode",
            PartClass::Capacitor => "capacitor",
        }
    }
}

impl fmt::Display for PartClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Individual π-factor names.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Factor {
    T,
    A,
    Q,
    E,
    S,
    C,
    Cp,
    V,
    Sr,
}

impl Factor {
    pub fn name(self) -> &'static str {
        match self {
            Factor::T => "pi_t",
            Factor::A => "pi_a",
            Factor::Q => "pi_q",
            Factor::E => "pi_e",
            Factor::S => "pi_s",
            Factor::C => "pi_c",
            Factor::Cp => "pi_cp",
            Factor::V => "pi_v",
            Factor::Sr => "pi_sr",
        }
    }
}

/// Base rate and π-factors of one part. Unused factors stay `None`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StressFactorSet {
    #[serde(
        rename(serialize = "lambda_b_1e-6_per_h"),
        alias = "lambda_b_1e-6_per_h",
        skip_serializing_if = "Option::is_none",
        default
    )]
    pub lambda_b: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub pi_t: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub pi_a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub pi_q: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub pi_e: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub pi_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub pi_c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub pi_cp: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub pi_v: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub pi_sr: Option<f64>,
}

impl StressFactorSet {
    pub fn get(&self, f: Factor) -> Option<f64> {
        match f {
            Factor::T => self.pi_t,
            Factor::A => self.pi_a,
            Factor::Q => self.pi_q,
            Factor::E => self.pi_e,
            Factor::S => self.pi_s,
            Factor::C => self.pi_c,
            Factor::Cp => self.pi_cp,
            Factor::V => self.pi_v,
            Factor::Sr => self.pi_sr,
        }
    }

    pub fn set(&mut self, f: Factor, value: f64) {
        let slot = match f {
            Factor::T => &mut self.pi_t,
            Factor::A => &mut self.pi_a,
            Factor::Q => &mut self.pi_q,
            Factor::E => &mut self.pi_e,
            Factor::S => &mut self.pi_s,
            Factor::C => &mut self.pi_c,
            Factor::Cp => &mut self.pi_cp,
            Factor::V => &mut self.pi_v,
            Factor::Sr => &mut self.pi_sr,
        };
        *slot = Some(value);
    }

    /// Copies every factor present in `other` over `self`.
    pub fn overlay(&mut self, other: &StressFactorSet) {
        if other.lambda_b.is_some() {
            self.lambda_b = other.lambda_b;
        }
        for f in [Factor::T, Factor::A, Factor::Q, Factor::E, Factor::S, Factor::C, Factor::Cp, Factor::V, Factor::Sr] {
            if let Some(v) = other.get(f) {
                self.set(f, v);
            }
        }
    }
}

/// Failure rate of one part.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartFailureRate {
    pub part: String,
    pub class: PartClass,
    #[serde(rename = "lambda_1e-6_per_h")]
    pub rate: f64,
}

/// Temperature factor at `t` °C (junction for semiconductors, hotspot for capacitors).
pub fn pi_t(part: PartType, t: f64) -> f64 {
    (-part.temperature_coefficient() * (1.0 / (t + 273.0) - 1.0 / 298.0)).exp()
}

/// Electrical stress factor of a diode at reverse-voltage ratio `vs`.
pub fn pi_s_diode(vs: f64) -> Result<f64> {
    if vs > 1.0 {
        return Err(Error::StressOverrange(vs));
    }
    if !(vs >= 0.0) {
        return Err(Error::domain(format!("voltage stress ratio must be non-negative, got {vs}")));
    }
    Ok(if vs <= 0.3 { 0.054 } else { vs.powf(2.43) })
}

/// Capacitance factor, capacitance in µF.
pub fn pi_cp(capacitance_uf: f64) -> f64 {
    capacitance_uf.powf(0.23)
}

/// Product of the base rate and the factors that apply to `part`.
pub fn part_failure_rate(part: PartType, factors: &StressFactorSet) -> Result<f64> {
    let lambda_b = factors
        .lambda_b
        .ok_or(Error::MissingFactor { part, factor: "lambda_b" })?;
    let mut rate = lambda_b;
    for &f in part.required_factors() {
        let v = factors
            .get(f)
            .ok_or(Error::MissingFactor { part, factor: f.name() })?;
        rate *= v;
    }
    if !(rate > 0.0 && rate.is_finite()) {
        return Err(Error::domain(format!("{part:?} failure rate {rate} is not positive")));
    }
    Ok(rate)
}

/// Canonical part census of a three-level NPC inverter.
pub const CANONICAL_COUNTS: [(PartClass, usize); 4] = [
    (PartClass::Mosfet, 12),
    (PartClass::FreewheelDiode, 12),
    (PartClass::ClampDiode, 6),
    (PartClass::Capacitor, 2),
];

/// Series-system failure rate: the sum of all part rates.
pub fn inverter_failure_rate(parts: &[PartFailureRate]) -> Result<f64> {
    if parts.is_empty() {
        return Err(Error::domain("cannot aggregate an empty part list"));
    }
    let counts = class_counts(parts);
    let canonical = CANONICAL_COUNTS
        .iter()
        .all(|(c, n)| counts.get(c).copied().unwrap_or(0) == *n);
    if !canonical {
        log::warn!("non-canonical NPC part census {counts:?}; summing anyway");
    }
    Ok(parts.iter().map(|p| p.rate).sum())
}

fn class_counts(parts: &[PartFailureRate]) -> BTreeMap<PartClass, usize> {
    let mut counts = BTreeMap::new();
    for p in parts {
        *counts.entry(p.class).or_insert(0) += 1;
    }
    counts
}

/// Mean time to failure in hours for a rate in failures per 10⁶ h.
pub fn mttf(lambda_total: f64) -> Result<f64> {
    if !(lambda_total > 0.0) {
        return Err(Error::domain(format!("failure rate must be positive, got {lambda_total}")));
    }
    Ok(1e6 / lambda_total)
}

/// Converts a rate in failures per 10⁶ h to FIT (failures per 10⁹ h).
pub fn to_fit(lambda: f64) -> f64 {
    lambda * 1e3
}

/// Share of the total rate carried by each part class, in percent.
pub fn contribution_shares(parts: &[PartFailureRate]) -> Result<Vec<(PartClass, f64)>> {
    if parts.is_empty() {
        return Err(Error::domain("cannot compute shares of an empty part list"));
    }
    let total: f64 = parts.iter().map(|p| p.rate).sum();
    let mut sums: BTreeMap<PartClass, f64> = BTreeMap::new();
    for p in parts {
        *sums.entry(p.class).or_insert(0.0) += p.rate;
    }
    Ok(sums.into_iter().map(|(c, s)| (c, 100.0 * s / total)).collect())
}

/// Boltzmann constant, eV/K.
pub const BOLTZMANN_EV: f64 = 8.62e-5;

/// Electrolytic-capacitor lifetime models. Temperatures in kelvin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum CapacitorLifetimeModel {
    /// `L0·(V/V0)^−n·exp((Ea/kB)(1/T − 1/T0))`
    ArrheniusPower { l0: f64, v0: f64, t0: f64, n: f64, ea: f64 },
    /// `L0·(V/V0)^−n·2^((T0 − T)/10)`
    TenDegreeDoubling { l0: f64, v0: f64, t0: f64, n: f64 },
    /// Regime switched on the stress parameter ξ.
    ThreeRegime(ThreeRegimeParams),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThreeRegimeParams {
    pub l0: f64,
    pub v0: f64,
    pub t0: f64,
    pub n: f64,
    pub ea: f64,
    pub a0: Option<f64>,
    pub a1: Option<f64>,
    pub ea0: Option<f64>,
    /// Upper ξ bound of the low-stress regime.
    pub xi_low: Option<f64>,
    /// Upper ξ bound of the medium-stress regime.
    pub xi_medium: Option<f64>,
}

impl CapacitorLifetimeModel {
    pub fn validate(&self) -> Result<()> {
        let (l0, v0, t0) = match *self {
            CapacitorLifetimeModel::ArrheniusPower { l0, v0, t0, .. }
            | CapacitorLifetimeModel::TenDegreeDoubling { l0, v0, t0, .. } => (l0, v0, t0),
            CapacitorLifetimeModel::ThreeRegime(p) => {
                if let (Some(lo), Some(mid)) = (p.xi_low, p.xi_medium) {
                    if !(lo < mid) {
                        return Err(Error::config(format!(
                            "stress thresholds must be ordered low < medium, got {lo} and {mid}"
                        )));
                    }
                }
                (p.l0, p.v0, p.t0)
            }
        };
        if !(l0 > 0.0 && v0 > 0.0 && t0 > 0.0) {
            return Err(Error::config("lifetime model needs positive L0, V0 and T0"));
        }
        Ok(())
    }
}

/// Lifetime in hours at voltage `v` (V), temperature `t` (K) and stress `xi`.
pub fn capacitor_lifetime(model: &CapacitorLifetimeModel, v: f64, t: f64, xi: f64) -> Result<f64> {
    model.validate()?;
    if !(v > 0.0 && t > 0.0) {
        return Err(Error::domain(format!("lifetime needs positive voltage and temperature, got {v} V, {t} K")));
    }
    let arrhenius = |ea: f64, t0: f64| ((ea / BOLTZMANN_EV) * (1.0 / t - 1.0 / t0)).exp();
    Ok(match *model {
        CapacitorLifetimeModel::ArrheniusPower { l0, v0, t0, n, ea } => {
            l0 * (v / v0).powf(-n) * arrhenius(ea, t0)
        }
        CapacitorLifetimeModel::TenDegreeDoubling { l0, v0, t0, n } => {
            l0 * (v / v0).powf(-n) * 2f64.powf((t0 - t) / 10.0)
        }
        CapacitorLifetimeModel::ThreeRegime(p) => {
            let need = |x: Option<f64>, name: &str| {
                x.ok_or_else(|| Error::config(format!("three-regime lifetime model needs `{name}`")))
            };
            let xi_low = need(p.xi_low, "xi_low")?;
            let xi_medium = need(p.xi_medium, "xi_medium")?;
            if xi <= xi_low {
                // linear voltage dependence as tabulated for the low-stress regime
                p.l0 * (v / p.v0) * arrhenius(p.ea, p.t0)
            } else if xi <= xi_medium {
                p.l0 * (v / p.v0).powf(-p.n) * arrhenius(p.ea, p.t0)
            } else {
                let a0 = need(p.a0, "a0")?;
                let a1 = need(p.a1, "a1")?;
                let ea0 = need(p.ea0, "ea0")?;
                let e = ea0 - xi * a0;
                p.l0 * (a1 * (p.v0 - v)).exp() * (e / (BOLTZMANN_EV * t) - e / (BOLTZMANN_EV * p.t0)).exp()
            }
        }
    })
}
