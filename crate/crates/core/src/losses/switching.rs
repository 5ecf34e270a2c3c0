//! Switching losses by period averaging of per-carrier commutation energies.
//!
//! Within a carrier period the leg alternates between the zero state and the
//! active state selected by the sign of the reference, so each period holds one
//! turn-on and one turn-off of a single switch. Which device commutates hard
//! depends on the current direction:
//!
//! | current | reference | hard-switched | recovering diode |
//! |---------|-----------|---------------|------------------|
//! | > 0     | > 0       | S1            | D5               |
//! | > 0     | < 0       | S2            | D4               |
//! | < 0     | > 0       | S3            | D1               |
//! | < 0     | < 0       | S4            | D6               |
//!
//! The switch in the other pair commutates at zero current and is not charged;
//! D2 and D3 never recover because S2/S3 stay on while their partner diode
//! conducts. Periods with the reference pinned at 0 or ±1 have no transition.

use serde::Serialize;

use super::{DeviceRole, Quadrature};
use crate::devices::{commutation_energy, DeviceSet};
use crate::error::Result;
use crate::modulation::{Modulator, OperatingPoint, StrategyId};

/// Devices that dissipate commutation energy in one carrier period.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Commutation {
    pub switch: DeviceRole,
    pub diode: DeviceRole,
}

/// Hard-switched pair for a reference value and current, if any.
pub fn commutation_events(mf: f64, current: f64) -> Option<Commutation> {
    use DeviceRole::*;
    if current == 0.0 || !(mf.abs() > 0.0 && mf.abs() < 1.0) {
        return None;
    }
    let (switch, diode) = match (current > 0.0, mf > 0.0) {
        (true, true) => (S1, D5),
        (true, false) => (S2, D4),
        (false, true) => (S3, D1),
        (false, false) => (S4, D6),
    };
    Some(Commutation { switch, diode })
}

/// Average switching loss of `role` with the default quadrature, W.
pub fn switching_loss(
    role: DeviceRole,
    devices: &DeviceSet,
    op: &OperatingPoint,
    strategy: StrategyId,
) -> Result<f64> {
    switching_loss_with(role, devices, op, strategy, Quadrature::default())
}

/// Average switching loss of `role`, W.
///
/// Energies are evaluated at the instantaneous current magnitude
/// `M·I·|sin θ|` and weighted by the carrier frequency.
pub fn switching_loss_with(
    role: DeviceRole,
    devices: &DeviceSet,
    op: &OperatingPoint,
    strategy: StrategyId,
    quad: Quadrature,
) -> Result<f64> {
    op.validate()?;
    quad.validate()?;
    let modulator = Modulator::new(strategy, op.modulation_index)?;
    let amplitude = op.modulation_index * op.peak_current;
    let mut acc = 0.0;
    for theta in quad.angles() {
        let i = amplitude * theta.sin();
        let Some(ev) = commutation_events(modulator.at_voltage_angle(theta + op.phase_lag), i) else {
            continue;
        };
        let a = i.abs();
        if ev.switch == role {
            acc += commutation_energy(&devices.switch.eon, a)? + commutation_energy(&devices.switch.eoff, a)?;
        } else if ev.diode == role {
            let fit = match role {
                DeviceRole::D5 | DeviceRole::D6 => &devices.clamp.erec,
                _ => &devices.freewheel.erec,
            };
            acc += commutation_energy(fit, a)?;
        }
    }
    Ok(op.carrier_frequency * acc / quad.samples as f64)
}
