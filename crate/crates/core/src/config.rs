//! Run configuration: a single TOML document with nested sections.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dclink::{AppliedVoltage, CapacitorSpec, DcLinkSettings, RedundancyPolicy};
use crate::devices::{DeviceLibrary, DeviceSet};
use crate::error::{Error, Result};
use crate::losses::Quadrature;
use crate::modulation::{OperatingPoint, StrategyId};
use crate::reliability::StressFactorSet;
use crate::thermal::ThermalPath;

/// The annotated default configuration, verbatim.
pub const DEFAULT_CONFIG_TOML: &str = include_str!("../config/default.toml");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub operating_point: OperatingPointConfig,
    pub simulation: SimulationConfig,
    pub devices: DeviceSelection,
    /// Devices defined inline; they take precedence over library files.
    #[serde(default)]
    pub library: DeviceLibrary,
    pub thermal: ThermalConfig,
    pub capacitors: CapacitorConfig,
    pub factors: BaseFactors,
    pub dclink: DcLinkConfig,
    pub strategies: BTreeMap<StrategyId, StrategyConfig>,
    /// Directory relative paths are resolved against.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatingPointConfig {
    pub modulation_index: f64,
    /// Displacement power factor of the (lagging) load.
    pub power_factor: f64,
    #[serde(rename = "peak_current_A")]
    pub peak_current: f64,
    #[serde(rename = "output_frequency_Hz")]
    pub output_frequency: f64,
    #[serde(rename = "carrier_frequency_Hz")]
    pub carrier_frequency: f64,
    #[serde(rename = "dc_link_voltage_V")]
    pub dc_link_voltage: f64,
    #[serde(rename = "ambient_temperature_degC")]
    pub ambient_temperature: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    pub angle_samples: usize,
    #[serde(rename = "step_s")]
    pub step: f64,
    pub cycles: usize,
    pub averaging_cycles: usize,
    #[serde(rename = "balancing_resistance_ohm", default)]
    pub balancing_resistance: Option<f64>,
    pub trace_stride: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceSelection {
    pub switch: String,
    pub freewheel: String,
    pub clamp: String,
    #[serde(default)]
    pub library: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThermalConfig {
    pub switch: ThermalPath,
    pub freewheel: ThermalPath,
    pub clamp: ThermalPath,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapacitorConfig {
    pub c1: CapacitorSpec,
    pub c2: CapacitorSpec,
    #[serde(rename = "hotspot_temperature_degC")]
    pub hotspot_temperature: f64,
}

/// Strategy-independent base rates and quality/environment factors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaseFactors {
    pub mosfet: StressFactorSet,
    pub freewheel: DiodeFactors,
    pub clamp: DiodeFactors,
    pub capacitor: StressFactorSet,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiodeFactors {
    #[serde(flatten)]
    pub factors: StressFactorSet,
    /// Applied over rated reverse voltage.
    pub voltage_stress_ratio: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VoltageSource {
    #[default]
    Config,
    Simulator,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DcLinkConfig {
    #[serde(default)]
    pub voltage_source: VoltageSource,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrategyConfig {
    pub policy: RedundancyPolicy,
    pub applied: CapacitorVoltages,
    #[serde(default)]
    pub overrides: FactorOverrides,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapacitorVoltages {
    pub c1: AppliedVoltage,
    pub c2: AppliedVoltage,
}

/// Factors injected per device group in paper-factors mode.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorOverrides {
    #[serde(default)]
    pub s1_s4: StressFactorSet,
    #[serde(default)]
    pub s2_s3: StressFactorSet,
    #[serde(default)]
    pub d1_d4: StressFactorSet,
    #[serde(default)]
    pub d5_d6: StressFactorSet,
    #[serde(default)]
    pub c1: StressFactorSet,
    #[serde(default)]
    pub c2: StressFactorSet,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig::from_toml(DEFAULT_CONFIG_TOML).expect("embedded default configuration is valid")
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::from(e).context(format!("reading {}", path.display())))?;
        let mut cfg: RunConfig = toml::from_str(&text)
            .map_err(|e| Error::config(format!("{}: {e}", path.display())))?;
        cfg.base_dir = path.parent().map(Path::to_path_buf);
        cfg.validate().map_err(|e| e.context(path.display().to_string()))?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        self.operating_point()
            .validate()
            .map_err(|e| Error::config(e.to_string()))?;
        let pf = self.operating_point.power_factor;
        if !(pf > 0.0 && pf <= 1.0) {
            return Err(Error::config(format!("power factor must lie in (0, 1], got {pf}")));
        }
        self.quadrature().map_err(|e| Error::config(e.to_string()))?;
        self.thermal.switch.validate()?;
        self.thermal.freewheel.validate()?;
        self.thermal.clamp.validate()?;
        self.capacitors.c1.validate()?;
        self.capacitors.c2.validate()?;
        for s in StrategyId::ALL {
            if !self.strategies.contains_key(&s) {
                return Err(Error::config(format!("missing [strategies.{}] section", s.key())));
            }
        }
        for (name, d) in [("freewheel", &self.factors.freewheel), ("clamp", &self.factors.clamp)] {
            let vs = d.voltage_stress_ratio;
            if !(0.0..=1.0).contains(&vs) {
                return Err(Error::config(format!(
                    "{name} voltage_stress_ratio must lie in [0, 1], got {vs}"
                )));
            }
        }
        self.device_set()?;
        Ok(())
    }

    pub fn operating_point(&self) -> OperatingPoint {
        let o = &self.operating_point;
        OperatingPoint {
            modulation_index: o.modulation_index,
            phase_lag: o.power_factor.clamp(-1.0, 1.0).acos(),
            peak_current: o.peak_current,
            output_frequency: o.output_frequency,
            carrier_frequency: o.carrier_frequency,
            dc_link_voltage: o.dc_link_voltage,
            ambient_temperature: o.ambient_temperature,
        }
    }

    pub fn quadrature(&self) -> Result<Quadrature> {
        Quadrature::new(self.simulation.angle_samples)
    }

    pub fn dclink_settings(&self) -> DcLinkSettings {
        let s = &self.simulation;
        DcLinkSettings {
            cycles: s.cycles,
            averaging_cycles: s.averaging_cycles,
            step: s.step,
            balancing_resistance: s.balancing_resistance,
            trace_stride: s.trace_stride,
        }
    }

    /// Built-in devices, then the optional library file, then inline entries.
    pub fn device_library(&self) -> Result<DeviceLibrary> {
        let mut lib = DeviceLibrary::builtin();
        if let Some(p) = &self.devices.library {
            let path = match &self.base_dir {
                Some(dir) if p.is_relative() => dir.join(p),
                _ => p.clone(),
            };
            lib.extend(DeviceLibrary::load(&path)?);
        }
        lib.extend(self.library.clone());
        Ok(lib)
    }

    pub fn device_set(&self) -> Result<DeviceSet> {
        let lib = self.device_library()?;
        let set = DeviceSet {
            switch: lib.switch(&self.devices.switch)?.physics.clone(),
            freewheel: lib.diode(&self.devices.freewheel)?.physics.clone(),
            clamp: lib.diode(&self.devices.clamp)?.physics.clone(),
        };
        set.validate()?;
        Ok(set)
    }

    pub fn strategy(&self, s: StrategyId) -> &StrategyConfig {
        &self.strategies[&s]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_reproduces_circuit_parameters() {
        let cfg = RunConfig::default();
        let op = cfg.operating_point();
        assert_eq!(op.dc_link_voltage, 300.0);
        assert_eq!(op.output_frequency, 50.0);
        assert_eq!(op.carrier_frequency, 1000.0);
        assert_eq!(cfg.capacitors.c1.capacitance_uf, 470.0);
        assert_eq!(cfg.operating_point.power_factor, 1.0);
        assert_eq!(op.phase_lag, 0.0);
        assert_eq!(op.modulation_index, 1.0);
        assert_eq!(cfg.devices.switch, "IRF740");
        assert_eq!(cfg.devices.clamp, "MUR1560");
        assert_eq!((cfg.thermal.switch.r_jc, cfg.thermal.switch.case_to_ambient()), (1.0, 61.0));
        assert_eq!((cfg.thermal.clamp.r_jc, cfg.thermal.clamp.case_to_ambient()), (2.0, 58.0));
        assert_eq!(cfg.simulation.step, 1e-6);
    }

    #[test]
    fn unknown_keys_are_config_errors() {
        let text = DEFAULT_CONFIG_TOML.replace("[dclink]", "[dclink]\nbogus = 1");
        let e = RunConfig::from_toml(&text).unwrap_err();
        assert_eq!(e.class(), crate::error::ErrorClass::Config);
    }

    #[test]
    fn missing_device_is_config_error() {
        let text = DEFAULT_CONFIG_TOML.replace("switch = \"IRF740\"", "switch = \"IRF9999\"");
        let e = RunConfig::from_toml(&text).unwrap_err();
        assert_eq!(e.class(), crate::error::ErrorClass::Config);
        assert!(e.to_string().contains("IRF9999"));
    }

    #[test]
    fn invalid_operating_point_is_config_error() {
        let text = DEFAULT_CONFIG_TOML.replace("modulation_index = 1.0", "modulation_index = 1.5");
        assert_eq!(RunConfig::from_toml(&text).unwrap_err().class(), crate::error::ErrorClass::Config);
    }

    #[test]
    fn serialisation_round_trip() {
        let cfg = RunConfig::default();
        let again = RunConfig::from_toml(&cfg.to_toml().unwrap()).unwrap();
        assert_eq!(cfg, again);
    }
}
