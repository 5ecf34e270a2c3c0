use super::{device_for, DeviceRole, Quadrature};
use crate::devices::DeviceSet;
use crate::error::Result;
use crate::modulation::{duty_cycles, Modulator, OperatingPoint, StrategyId};

/// Fraction of a carrier period that `role` carries the load current, given
/// the modulating function `mf` and the sign of the current.
///
/// Positive current flows out of the leg: through S1+S2 in the positive state,
/// through D5+S2 in the zero state and through D3+D4 in the negative state.
/// Negative current is the mirror image.
pub fn conduction_duty(role: DeviceRole, mf: f64, current: f64) -> Result<f64> {
    use DeviceRole::*;
    let d = duty_cycles(mf)?;
    let pos = current > 0.0;
    let neg = current < 0.0;
    let duty = match role {
        S1 if pos => d.positive,
        S2 if pos => 1.0 - d.negative,
        S3 if neg => 1.0 - d.positive,
        S4 if neg => d.negative,
        D1 | D2 if neg => d.positive,
        D3 | D4 if pos => d.negative,
        D5 if pos => d.zero(),
        D6 if neg => d.zero(),
        _ => 0.0,
    };
    Ok(duty)
}

/// Period-averaged conduction loss of `role` with the default quadrature.
pub fn conduction_loss_numeric(
    strategy: StrategyId,
    role: DeviceRole,
    devices: &DeviceSet,
    op: &OperatingPoint,
) -> Result<f64> {
    conduction_loss_numeric_with(strategy, role, devices, op, Quadrature::default())
}

/// Period-averaged conduction loss of `role`.
///
/// The current is `I·sin θ`; the reference is evaluated at `θ + φ`.
pub fn conduction_loss_numeric_with(
    strategy: StrategyId,
    role: DeviceRole,
    devices: &DeviceSet,
    op: &OperatingPoint,
    quad: Quadrature,
) -> Result<f64> {
    op.validate()?;
    quad.validate()?;
    let modulator = Modulator::new(strategy, op.modulation_index)?;
    let (v0, r) = device_for(role, devices).linear();
    let mut acc = 0.0;
    for theta in quad.angles() {
        let i = op.peak_current * theta.sin();
        if i == 0.0 {
            continue;
        }
        let duty = conduction_duty(role, modulator.at_voltage_angle(theta + op.phase_lag), i)?;
        let a = i.abs();
        acc += (v0 + r * a) * a * duty;
    }
    Ok(acc / quad.samples as f64)
}
