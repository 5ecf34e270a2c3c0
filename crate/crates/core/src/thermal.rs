//! Steady-state junction temperature from losses and a series thermal path.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Case-to-ambient part of a thermal path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Sink {
    FreeAir { r_ca: f64 },
    Heatsink { r_ch: f64, r_ha: f64 },
}

/// Junction → case → ambient thermal resistances, °C/W.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermalPath {
    pub r_jc: f64,
    #[serde(flatten)]
    pub sink: Sink,
}

impl ThermalPath {
    pub fn free_air(r_jc: f64, r_ca: f64) -> Self {
        Self { r_jc, sink: Sink::FreeAir { r_ca } }
    }

    pub fn heatsink(r_jc: f64, r_ch: f64, r_ha: f64) -> Self {
        Self { r_jc, sink: Sink::Heatsink { r_ch, r_ha } }
    }

    pub fn case_to_ambient(&self) -> f64 {
        match self.sink {
            Sink::FreeAir { r_ca } => r_ca,
            Sink::Heatsink { r_ch, r_ha } => r_ch + r_ha,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let parts: &[(&str, f64)] = match self.sink {
            Sink::FreeAir { r_ca } => &[("r_jc", self.r_jc), ("r_ca", r_ca)],
            Sink::Heatsink { r_ch, r_ha } => &[("r_jc", self.r_jc), ("r_ch", r_ch), ("r_ha", r_ha)],
        };
        for &(name, r) in parts {
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::config(format!(
                    "thermal resistance {name} must be positive, got {r}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TemperaturePair {
    #[serde(rename = "tc_degC")]
    pub t_case: f64,
    #[serde(rename = "tj_degC")]
    pub t_junction: f64,
}

/// Case and junction temperature for a dissipation of `p_loss` watts.
pub fn junction_temperature(p_loss: f64, ta: f64, path: &ThermalPath) -> Result<TemperaturePair> {
    if !(p_loss >= 0.0) {
        return Err(Error::domain(format!("loss must be non-negative, got {p_loss} W")));
    }
    let t_case = ta + p_loss * path.case_to_ambient();
    let t_junction = t_case + p_loss * path.r_jc;
    Ok(TemperaturePair { t_case, t_junction })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    const FREE_AIR: ThermalPath = ThermalPath { r_jc: 1.0, sink: Sink::FreeAir { r_ca: 61.0 } };

    #[test]
    fn zero_loss_sits_at_ambient() {
        let t = junction_temperature(0.0, 31.5, &FREE_AIR).unwrap();
        assert_eq!((t.t_case, t.t_junction), (31.5, 31.5));
    }

    #[test]
    fn free_air_example() {
        let t = junction_temperature(0.64, 25.0, &FREE_AIR).unwrap();
        assert_abs_diff_eq!(t.t_case, 64.04, epsilon = 1e-12);
        assert_abs_diff_eq!(t.t_junction, 64.68, epsilon = 1e-12);
    }

    #[test]
    fn heatsink_equivalent_to_free_air() {
        let hs = ThermalPath::heatsink(1.0, 20.0, 41.0);
        for p in [0.0, 0.3, 1.7] {
            assert_eq!(
                junction_temperature(p, 25.0, &hs).unwrap(),
                junction_temperature(p, 25.0, &FREE_AIR).unwrap()
            );
        }
    }

    #[test]
    fn negative_loss_rejected() {
        assert!(matches!(junction_temperature(-0.1, 25.0, &FREE_AIR), Err(Error::Domain(_))));
    }

    #[test]
    fn path_parses_both_sink_shapes() {
        let fa: ThermalPath = toml::from_str("r_jc = 1.0\nr_ca = 61.0").unwrap();
        assert_eq!(fa, FREE_AIR);
        let hs: ThermalPath = toml::from_str("r_jc = 1.0\nr_ch = 0.5\nr_ha = 2.0").unwrap();
        assert_eq!(hs.case_to_ambient(), 2.5);
        assert!(ThermalPath::free_air(1.0, 0.0).validate().is_err());
    }

    proptest! {
        #[test]
        fn rise_is_linear_in_loss(p in 0.0f64..20.0, k in 0.0f64..5.0, ta in -40.0f64..80.0) {
            let base = junction_temperature(p, ta, &FREE_AIR).unwrap().t_junction - ta;
            let scaled = junction_temperature(k * p, ta, &FREE_AIR).unwrap().t_junction - ta;
            prop_assert!((scaled - k * base).abs() <= 1e-12 * (1.0 + scaled.abs()) + 1e-12 * ta.abs());
        }

        #[test]
        fn ordering(p in 0.0f64..20.0, ta in -40.0f64..80.0) {
            let t = junction_temperature(p, ta, &FREE_AIR).unwrap();
            prop_assert!(t.t_junction >= t.t_case && t.t_case >= ta);
        }
    }
}
