//! Closed-form conduction losses for carrier-based SPWM and THIPWM.
//!
//! Each expression covers one role; the mirrored roles share it. The numeric
//! integrator is the reference: [`validate_closed_forms`] compares every
//! expression against it and flags disagreements instead of trusting either.

use std::f64::consts::{FRAC_PI_3, FRAC_PI_6, PI};

use serde::Serialize;

use super::{conduction_loss_numeric_with, device_for, DeviceRole, Quadrature};
use crate::devices::DeviceSet;
use crate::error::{Error, Result};
use crate::modulation::{check_modulation_index, OperatingPoint, StrategyId};

/// Relative agreement required between a closed form and the integrator.
pub const CLOSED_FORM_TOLERANCE: f64 = 5e-3;

const SQRT3: f64 = 1.732_050_807_568_877_2;

/// Closed-form conduction loss of `role`, W.
pub fn conduction_loss_closed_form(
    strategy: StrategyId,
    role: DeviceRole,
    devices: &DeviceSet,
    op: &OperatingPoint,
) -> Result<f64> {
    if strategy == StrategyId::Svpwm {
        return Err(Error::UnsupportedStrategy(strategy));
    }
    check_modulation_index(op.modulation_index)?;
    let (v, r) = device_for(role, devices).linear();
    let (m, p, i) = (op.modulation_index, op.phase_lag, op.peak_current);
    let family = canonical(role);
    Ok(match strategy {
        StrategyId::Spwm => spwm(family, m, p, i, r, v),
        _ => thipwm(family, m, p, i, r, v),
    })
}

/// Role whose expression also serves `role`.
fn canonical(role: DeviceRole) -> DeviceRole {
    use DeviceRole::*;
    match role {
        S1 | S4 => S1,
        S2 | S3 => S2,
        D1 | D2 | D3 | D4 => D1,
        D5 | D6 => D5,
    }
}

fn spwm(role: DeviceRole, m: f64, p: f64, i: f64, r: f64, v: f64) -> f64 {
    let (s, c) = p.sin_cos();
    let ri2 = r * i * i;
    match role {
        DeviceRole::S1 => {
            m * ri2 / (6.0 * PI) * (1.0 + c).powi(2) + m * i * v / (4.0 * PI) * ((PI - p) * c + s)
        }
        DeviceRole::S2 => {
            (ri2 / 4.0 + i * v / PI) - m * ri2 / (6.0 * PI) * (1.0 - c).powi(2)
                + m * i * v / (4.0 * PI) * (p * c - s)
        }
        DeviceRole::D1 => m * v * i / (4.0 * PI) * (s - p * c) + m * ri2 / (6.0 * PI) * (1.0 - c).powi(2),
        _ => {
            (ri2 / 4.0 + i * v / PI)
                + m * (i * v / (4.0 * PI) * ((2.0 * p - PI) * c - 2.0 * s)
                    - ri2 / (3.0 * PI) * (1.0 + c * c))
        }
    }
}

fn thipwm(role: DeviceRole, m: f64, p: f64, i: f64, r: f64, v: f64) -> f64 {
    let (s, c) = p.sin_cos();
    let s4 = (p / 2.0).sin().powi(4);
    match role {
        DeviceRole::S1 => {
            m * i / (180.0 * SQRT3 * PI)
                * (8.0 * i * r * (p / 2.0).cos().powi(4) * (37.0 - 8.0 * c)
                    + 15.0 * v * (6.0 * (PI - p) * c + (6.0 + s * s) * s))
        }
        DeviceRole::S2 => {
            i / (540.0 * PI)
                * (-269.0 * SQRT3 * m * i * r * s4
                    + 2.0 * SQRT3 * m * c
                        * (45.0 * p * v - 32.0 * i * r * s4
                            + 15.0
                                * (9.0 * PI * i * r + 36.0 * v
                                    - 6.0 * SQRT3 * m * v * s
                                    - SQRT3 * m * v * s.powi(3))))
        }
        DeviceRole::D1 => {
            m * i / (180.0 * SQRT3 * PI)
                * (269.0 * i * r * s4
                    + c * (-90.0 * p * v + 64.0 * i * r * s4 + 15.0 * v * (6.0 + s * s) * s))
        }
        _ => {
            i / (1080.0 * PI)
                * (-180.0 * SQRT3 * m * (PI - 2.0 * p) * v * c
                    - 84.0 * SQRT3 * m * i * r * (2.0 * p).cos()
                    + 5.0
                        * (-76.0 * SQRT3 * m * i * r + 54.0 * PI * i * r + 216.0 * v
                            - 81.0 * SQRT3 * m * v * s
                            + 3.0 * SQRT3 * m * v * (3.0 * p).sin()))
        }
    }
}

/// One closed-form versus integrator comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClosedFormCheck {
    pub strategy: StrategyId,
    pub role: DeviceRole,
    pub modulation_index: f64,
    pub phase_lag: f64,
    pub closed_form_w: f64,
    /// Authoritative value.
    pub numeric_w: f64,
    pub relative_error: f64,
    pub flagged: bool,
}

/// The (M, φ) grid used to audit the closed forms.
pub fn closed_form_grid() -> Vec<(f64, f64)> {
    let mut g = Vec::with_capacity(12);
    for m in [0.2, 0.5, 0.8, 1.0] {
        for phi in [0.0, FRAC_PI_6, FRAC_PI_3] {
            g.push((m, phi));
        }
    }
    g
}

/// Compares every closed form of SPWM and THIPWM with the integrator over
/// `grid`, for all ten roles.
pub fn validate_closed_forms(
    devices: &DeviceSet,
    base: &OperatingPoint,
    grid: &[(f64, f64)],
    quad: Quadrature,
) -> Result<Vec<ClosedFormCheck>> {
    let mut out = Vec::new();
    for strategy in [StrategyId::Spwm, StrategyId::Thipwm] {
        for role in DeviceRole::ALL {
            for &(m, phi) in grid {
                let op = base.with_modulation_index(m).with_phase_lag(phi);
                let closed = conduction_loss_closed_form(strategy, role, devices, &op)?;
                let numeric = conduction_loss_numeric_with(strategy, role, devices, &op, quad)?;
                // an absolute floor keeps vanishing losses (e.g. D1 at φ = 0) meaningful
                let (v, r) = device_for(role, devices).linear();
                let floor = 1e-9 * op.peak_current * (v + r * op.peak_current);
                let err = (closed - numeric).abs();
                let relative_error = err / numeric.abs().max(floor).max(f64::MIN_POSITIVE);
                out.push(ClosedFormCheck {
                    strategy,
                    role,
                    modulation_index: m,
                    phase_lag: phi,
                    closed_form_w: closed,
                    numeric_w: numeric,
                    relative_error,
                    flagged: err > CLOSED_FORM_TOLERANCE * numeric.abs() + floor,
                });
            }
        }
    }
    Ok(out)
}
