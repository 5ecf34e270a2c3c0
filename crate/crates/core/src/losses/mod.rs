//! Conduction and switching losses of the ten devices of an NPC leg.

mod closed_form;
mod conduction;
mod switching;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use closed_form::{
    closed_form_grid, conduction_loss_closed_form, validate_closed_forms, ClosedFormCheck,
    CLOSED_FORM_TOLERANCE,
};
pub use conduction::{conduction_loss_numeric, conduction_loss_numeric_with, conduction_duty};
pub use switching::{commutation_events, switching_loss, switching_loss_with, Commutation};

use crate::devices::{DeviceSet, DiodePhysics, OnState};
use crate::error::{Error, Result, ResultExt};
use crate::modulation::{OperatingPoint, StrategyId};

/// Position of a device inside a leg.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DeviceRole {
    S1,
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

/// Broad device class of a role.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DeviceClass {
    Switch,
    /// Anti-parallel diode across a switch.
    Freewheel,
    /// Neutral-point clamping diode.
    Clamp,
}

impl DeviceRole {
    pub const ALL: [DeviceRole; 10] = [
        DeviceRole::S1,
        DeviceRole::S2,
        DeviceRole::S3,
        DeviceRole::S4,
        DeviceRole::D1,
        DeviceRole::D2,
        DeviceRole::D3,
        DeviceRole::D4,
        DeviceRole::D5,
        DeviceRole::D6,
    ];

    pub fn class(self) -> DeviceClass {
        use DeviceRole::*;
        match self {
            S1 | S2 | S3 | S4 => DeviceClass::Switch,
            D1 | D2 | D3 | D4 => DeviceClass::Freewheel,
            D5 | D6 => DeviceClass::Clamp,
        }
    }

    /// Role with the same loss under a half-wave symmetric load.
    pub fn mirror(self) -> DeviceRole {
        use DeviceRole::*;
        match self {
            S1 => S4,
            S2 => S3,
            S3 => S2,
            S4 => S1,
            D1 => D4,
            D2 => D3,
            D3 => D2,
            D4 => D1,
            D5 => D6,
            D6 => D5,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        use DeviceRole::*;
        match self {
            S1 => "S1",
            S2 => "S2",
            S3 => "S3",
            S4 => "S4",
            D1 => "D1",
            D2 => "D2",
            D3 => "D3",
            D4 => "D4",
            D5 => "D5",
            D6 => "D6",
        }
    }
}

impl fmt::Display for DeviceRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DeviceRole {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        DeviceRole::ALL
            .into_iter()
            .find(|r| r.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::config(format!("unknown device role `{s}`")))
    }
}

/// Phase leg of the three-phase inverter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Leg {
    A,
    B,
    C,
}

impl Leg {
    pub const ALL: [Leg; 3] = [Leg::A, Leg::B, Leg::C];

    /// Electrical lag of the leg's phase, rad.
    pub fn phase_shift(self) -> f64 {
        2.0 * std::f64::consts::FRAC_PI_3 * (self as usize) as f64
    }
}

/// A device placed in a particular leg.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DeviceId {
    pub leg: Leg,
    pub role: DeviceRole,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LossBreakdown {
    #[serde(rename = "p_cond_W")]
    pub p_cond: f64,
    #[serde(rename = "p_sw_W")]
    pub p_sw: f64,
    #[serde(rename = "total_W")]
    pub total: f64,
}

impl LossBreakdown {
    pub fn new(p_cond: f64, p_sw: f64) -> Self {
        Self { p_cond, p_sw, total: p_cond + p_sw }
    }

    pub const ZERO: LossBreakdown = LossBreakdown { p_cond: 0.0, p_sw: 0.0, total: 0.0 };
}

impl std::ops::Add for LossBreakdown {
    type Output = LossBreakdown;
    fn add(self, o: LossBreakdown) -> LossBreakdown {
        LossBreakdown::new(self.p_cond + o.p_cond, self.p_sw + o.p_sw)
    }
}

impl std::ops::Mul<f64> for LossBreakdown {
    type Output = LossBreakdown;
    fn mul(self, k: f64) -> LossBreakdown {
        LossBreakdown::new(self.p_cond * k, self.p_sw * k)
    }
}

/// Number of uniform angle samples used for period averages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Quadrature {
    pub samples: usize,
}

impl Quadrature {
    pub const MIN_SAMPLES: usize = 100;

    pub fn new(samples: usize) -> Result<Self> {
        let q = Self { samples };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples < Self::MIN_SAMPLES {
            return Err(Error::Numeric(format!(
                "{} samples per period is too coarse for the loss integrals (minimum {})",
                self.samples,
                Self::MIN_SAMPLES
            )));
        }
        Ok(())
    }

    /// Midpoint angles over one period.
    pub(crate) fn angles(&self) -> impl Iterator<Item = f64> + '_ {
        let h = std::f64::consts::TAU / self.samples as f64;
        (0..self.samples).map(move |k| (k as f64 + 0.5) * h)
    }
}

impl Default for Quadrature {
    fn default() -> Self {
        Self { samples: 10_000 }
    }
}

pub(crate) enum RoleDevice<'a> {
    Switch(&'a crate::devices::SwitchPhysics),
    Diode(&'a DiodePhysics),
}

impl RoleDevice<'_> {
    pub(crate) fn linear(&self) -> (f64, f64) {
        match self {
            RoleDevice::Switch(s) => (s.threshold(), s.slope()),
            RoleDevice::Diode(d) => (d.threshold(), d.slope()),
        }
    }
}

pub(crate) fn device_for(role: DeviceRole, devices: &DeviceSet) -> RoleDevice<'_> {
    match role.class() {
        DeviceClass::Switch => RoleDevice::Switch(&devices.switch),
        DeviceClass::Freewheel => RoleDevice::Diode(&devices.freewheel),
        DeviceClass::Clamp => RoleDevice::Diode(&devices.clamp),
    }
}

/// Per-role losses of one leg plus leg and inverter totals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossDistribution {
    pub strategy: StrategyId,
    pub roles: Vec<(DeviceRole, LossBreakdown)>,
    pub leg_total: LossBreakdown,
    pub inverter_total: LossBreakdown,
}

impl LossDistribution {
    pub fn get(&self, role: DeviceRole) -> LossBreakdown {
        self.roles[role.index()].1
    }
}

/// Losses of every role of a leg; the three legs are identical under a
/// balanced load so the inverter total is three leg totals.
pub fn loss_distribution(
    op: &OperatingPoint,
    strategy: StrategyId,
    devices: &DeviceSet,
    quad: Quadrature,
) -> Result<LossDistribution> {
    let mut roles = Vec::with_capacity(10);
    for role in DeviceRole::ALL {
        let p_cond = conduction_loss_numeric_with(strategy, role, devices, op, quad)
            .context(|| format!("{strategy} {role} conduction"))?;
        let p_sw = switching_loss_with(role, devices, op, strategy, quad)
            .context(|| format!("{strategy} {role} switching"))?;
        roles.push((role, LossBreakdown::new(p_cond, p_sw)));
    }
    let leg_total = roles.iter().fold(LossBreakdown::ZERO, |acc, (_, b)| acc + *b);
    Ok(LossDistribution { strategy, roles, leg_total, inverter_total: leg_total * 3.0 })
}


#[cfg(test)]
mod tests {
    use super::test_support::*;
    use super::*;
    use std::f64::consts::FRAC_PI_6;

    #[test]
    fn totals_add_up_and_mirror_roles_agree() {
        let devs = devices(0.7, 0.5);
        for s in StrategyId::ALL {
            let d = loss_distribution(&op(0.9, FRAC_PI_6, 10.0), s, &devs, Quadrature::default())
                .unwrap();
            let sum: f64 = d.roles.iter().map(|(_, b)| b.total).sum();
            assert!((sum - d.leg_total.total).abs() < 1e-12);
            assert!((d.inverter_total.total - 3.0 * sum).abs() < 1e-9);
            for (role, b) in &d.roles {
                let m = d.get(role.mirror());
                assert!((b.total - m.total).abs() <= 1e-6 * (1.0 + b.total), "{s} {role}");
                assert!((b.total - b.p_cond - b.p_sw).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn idle_inverter_has_no_loss() {
        let devs = devices(0.7, 0.5);
        for s in StrategyId::ALL {
            let d = loss_distribution(&op(1.0, 0.0, 0.0), s, &devs, Quadrature::default()).unwrap();
            assert!(d.roles.iter().all(|(_, b)| b.total == 0.0));
        }
    }

    #[test]
    fn conduction_dominates_s1_at_unity_power_factor() {
        let lib = crate::devices::DeviceLibrary::builtin();
        let devs = DeviceSet {
            switch: lib.switch("IRF740").unwrap().physics.clone(),
            freewheel: lib.diode("MUR1560").unwrap().physics.clone(),
            clamp: lib.diode("MUR1560").unwrap().physics.clone(),
        };
        let d = loss_distribution(&op(1.0, 0.0, 2.5), StrategyId::Spwm, &devs, Quadrature::default())
            .unwrap();
        let s1 = d.get(DeviceRole::S1);
        assert!(s1.p_cond > s1.p_sw);
    }

    #[test]
    fn coarse_quadrature_is_a_numeric_error() {
        assert!(matches!(Quadrature::new(50), Err(Error::Numeric(_))));
    }

    #[test]
    fn role_parsing_and_classes() {
        assert_eq!("d5".parse::<DeviceRole>().unwrap(), DeviceRole::D5);
        assert_eq!(DeviceRole::D3.class(), DeviceClass::Freewheel);
        assert_eq!(DeviceRole::D6.class(), DeviceClass::Clamp);
        for r in DeviceRole::ALL {
            assert_eq!(r.mirror().mirror(), r);
            assert_eq!(DeviceRole::ALL[r.index()], r);
        }
    }
}
