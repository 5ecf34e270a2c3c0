//! DC-link capacitor voltage stress and a switching-function simulation of
//! the neutral-point voltages.

use std::f64::consts::{FRAC_PI_3, TAU};
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modulation::{load_current, Modulator, OperatingPoint, StrategyId};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapacitorSpec {
    /// µF
    pub capacitance_uf: f64,
    pub v_rated: f64,
    pub pi_q: f64,
    pub pi_sr: f64,
}

impl CapacitorSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.capacitance_uf > 0.0) {
            return Err(Error::config(format!(
                "capacitance must be positive, got {} µF",
                self.capacitance_uf
            )));
        }
        if !(self.v_rated > 0.0) {
            return Err(Error::config(format!(
                "capacitor rated voltage must be positive, got {} V",
                self.v_rated
            )));
        }
        Ok(())
    }
}

/// Voltage applied to a capacitor: mean plus RMS ripple.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AppliedVoltage {
    #[serde(rename = "v_dc_V")]
    pub v_dc: f64,
    #[serde(rename = "v_ac_rms_V")]
    pub v_ac: f64,
}

/// Stress ratio `S = (V_dc + √2·V_ac) / (0.6·V_rated)`.
pub fn voltage_stress(applied: &AppliedVoltage, spec: &CapacitorSpec) -> f64 {
    (applied.v_dc + std::f64::consts::SQRT_2 * applied.v_ac) / (0.6 * spec.v_rated)
}

/// Capacitor voltage factor `(S/0.6)^5 + 1`.
pub fn pi_v(s: f64) -> f64 {
    (s / 0.6).powi(5) + 1.0
}

/// How the redundant zero-state dwell is shared between the two capacitors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case")]
pub enum RedundancyPolicy {
    /// References used as generated.
    Symmetric,
    /// A constant offset added to all three references (clamped to ±1).
    /// A positive offset lengthens the positive state and discharges C1.
    Biased { bias: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DcLinkSettings {
    /// Fundamental periods to simulate (at least 10).
    pub cycles: usize,
    /// Periods at the end used for the statistics.
    pub averaging_cycles: usize,
    /// Integration step, s.
    pub step: f64,
    /// Bleeder resistor across each capacitor, Ω. `None` leaves the neutral point floating.
    pub balancing_resistance: Option<f64>,
    /// Keep every n-th step in the trace.
    pub trace_stride: usize,
}

impl Default for DcLinkSettings {
    fn default() -> Self {
        Self {
            cycles: 20,
            averaging_cycles: 5,
            step: 1e-6,
            balancing_resistance: Some(220.0),
            trace_stride: 10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub time_s: f64,
    pub v_c1: f64,
    pub v_c2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DcLinkResult {
    pub c1: AppliedVoltage,
    pub c2: AppliedVoltage,
    /// Mean neutral-point current over the averaging window, A.
    pub mean_np_current: f64,
    /// Largest `|V_C1 + V_C2 − Vdc|` seen during the run, V.
    pub max_sum_error: f64,
    pub trace: Vec<TracePoint>,
}

/// Integrates the neutral-point current into the capacitor voltages.
///
/// Each leg compares its reference with two in-phase carriers spanning
/// `[0, 1]` and `[−1, 0]`; a leg in the zero state connects its phase current
/// to the neutral point. The source is stiff, so `V_C1 + V_C2 = Vdc`.
pub fn simulate_np_voltages(
    strategy: StrategyId,
    op: &OperatingPoint,
    caps: (&CapacitorSpec, &CapacitorSpec),
    policy: RedundancyPolicy,
    settings: &DcLinkSettings,
) -> Result<DcLinkResult> {
    op.validate()?;
    caps.0.validate()?;
    caps.1.validate()?;
    if settings.cycles < 10 {
        return Err(Error::domain(format!(
            "at least 10 fundamental periods are needed to settle, got {}",
            settings.cycles
        )));
    }
    if settings.averaging_cycles == 0 || settings.averaging_cycles > settings.cycles {
        return Err(Error::domain("averaging window must be between 1 period and the run length"));
    }
    if settings.trace_stride == 0 {
        return Err(Error::domain("trace stride must be at least 1"));
    }
    let c1 = caps.0.capacitance_uf * 1e-6;
    let c2 = caps.1.capacitance_uf * 1e-6;
    let dt = settings.step;
    let carrier_period = 1.0 / op.carrier_frequency;
    if !(dt > 0.0) || dt > carrier_period / 20.0 {
        return Err(Error::Numeric(format!(
            "step {dt} s does not resolve the {carrier_period} s carrier period"
        )));
    }
    let g = match settings.balancing_resistance {
        Some(r) if r > 0.0 => {
            if dt > 0.05 * r * (c1 + c2) / 2.0 {
                return Err(Error::Numeric(format!(
                    "step {dt} s is too coarse for the balancing time constant"
                )));
            }
            1.0 / r
        }
        Some(r) => return Err(Error::config(format!("balancing resistance must be positive, got {r}"))),
        None => 0.0,
    };
    let bias = match policy {
        RedundancyPolicy::Symmetric => 0.0,
        RedundancyPolicy::Biased { bias } => bias,
    };

    let modulator = Modulator::new(strategy, op.modulation_index)?;
    let vdc = op.dc_link_voltage;
    let omega = TAU * op.output_frequency;
    let period = 1.0 / op.output_frequency;
    let steps = (settings.cycles as f64 * period / dt).round() as usize;
    let avg_from = steps - (settings.averaging_cycles as f64 * period / dt).round() as usize;

    let mut v1 = vdc / 2.0;
    let mut trace = Vec::with_capacity(steps / settings.trace_stride + 1);
    let (mut s1, mut s1sq, mut s2, mut s2sq, mut sinp) = (0.0, 0.0, 0.0, 0.0, 0.0);
    let mut max_sum_error: f64 = 0.0;

    for n in 0..steps {
        let t = n as f64 * dt;
        let v2 = vdc - v1;
        max_sum_error = max_sum_error.max((v1 + v2 - vdc).abs());
        if n % settings.trace_stride == 0 {
            trace.push(TracePoint { time_s: t, v_c1: v1, v_c2: v2 });
        }
        if n >= avg_from {
            s1 += v1;
            s1sq += v1 * v1;
            s2 += v2;
            s2sq += v2 * v2;
        }

        // triangular carrier in [0, 1]
        let phase = (t / carrier_period).fract();
        let upper = 1.0 - (2.0 * phase - 1.0).abs();
        let lower = upper - 1.0;
        let x = omega * t;
        let mut i_np = 0.0;
        for k in 0..3 {
            let shift = 2.0 * FRAC_PI_3 * k as f64;
            let r = (modulator.at_voltage_angle(x - shift) + bias).clamp(-1.0, 1.0);
            if r < upper && r >= lower {
                i_np += load_current(op.modulation_index, x - shift, op.phase_lag, op.peak_current);
            }
        }
        if n >= avg_from {
            sinp += i_np;
        }
        let dv1 = (i_np + g * (v2 - v1)) / (c1 + c2);
        v1 += dv1 * dt;
    }

    let count = (steps - avg_from) as f64;
    let stats = |s: f64, sq: f64| {
        let mean = s / count;
        AppliedVoltage { v_dc: mean, v_ac: (sq / count - mean * mean).max(0.0).sqrt() }
    };
    Ok(DcLinkResult {
        c1: stats(s1, s1sq),
        c2: stats(s2, s2sq),
        mean_np_current: sinp / count,
        max_sum_error,
        trace,
    })
}

/// Writes a trace as whitespace-separated columns with a header line.
pub fn write_trace<W: Write>(mut w: W, trace: &[TracePoint]) -> Result<()> {
    writeln!(w, "time_s V_C1_V V_C2_V")?;
    for p in trace {
        writeln!(w, "{:.9e} {:.6} {:.6}", p.time_s, p.v_c1, p.v_c2)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    const CAP: CapacitorSpec = CapacitorSpec { capacitance_uf: 470.0, v_rated: 250.0, pi_q: 10.0, pi_sr: 1.0 };

    fn op(imax: f64) -> OperatingPoint {
        OperatingPoint {
            modulation_index: 1.0,
            phase_lag: 0.0,
            peak_current: imax,
            output_frequency: 50.0,
            carrier_frequency: 1000.0,
            dc_link_voltage: 300.0,
            ambient_temperature: 25.0,
        }
    }

    #[test]
    fn stress_examples() {
        let s = |v_dc| voltage_stress(&AppliedVoltage { v_dc, v_ac: 0.0 }, &CAP);
        assert_abs_diff_eq!(s(150.0), 1.0, epsilon = 1e-15);
        assert_eq!(s(0.0), 0.0);
        assert_abs_diff_eq!(s(90.0), 0.6, epsilon = 1e-15);
        assert_abs_diff_eq!(pi_v(0.6), 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(pi_v(1.0), 13.86, epsilon = 5e-3);
        assert_eq!(pi_v(0.0), 1.0);
    }

    #[test]
    fn idle_load_holds_half_voltage() {
        let r = simulate_np_voltages(StrategyId::Svpwm, &op(0.0), (&CAP, &CAP), RedundancyPolicy::Biased { bias: 0.04 }, &DcLinkSettings::default())
            .unwrap();
        assert_eq!(r.c1.v_dc, 150.0);
        assert_eq!(r.c2.v_dc, 150.0);
        assert_eq!(r.c1.v_ac, 0.0);
        assert_eq!(r.c2.v_ac, 0.0);
    }

    #[test]
    fn carrier_strategies_stay_balanced() {
        for s in [StrategyId::Spwm, StrategyId::Thipwm] {
            let r = simulate_np_voltages(s, &op(2.5), (&CAP, &CAP), RedundancyPolicy::Symmetric, &DcLinkSettings::default())
                .unwrap();
            assert!((r.c1.v_dc - r.c2.v_dc).abs() < 0.01 * 150.0, "{s}: {:?} {:?}", r.c1, r.c2);
            assert!(r.max_sum_error < 1e-9);
            assert!(r.mean_np_current.abs() < 0.01 * 2.5);
        }
    }

    #[test]
    fn biased_dwell_loads_lower_capacitor() {
        let r = simulate_np_voltages(StrategyId::Svpwm, &op(2.5), (&CAP, &CAP), RedundancyPolicy::Biased { bias: 0.04 }, &DcLinkSettings::default())
            .unwrap();
        assert!(r.c2.v_dc > r.c1.v_dc + 1.0, "{:?} {:?}", r.c1, r.c2);
    }

    #[test]
    fn rejects_coarse_steps_and_short_runs() {
        let mut s = DcLinkSettings::default();
        s.step = 1e-4;
        let e = simulate_np_voltages(StrategyId::Spwm, &op(2.5), (&CAP, &CAP), RedundancyPolicy::Symmetric, &s);
        assert!(matches!(e, Err(Error::Numeric(_))));
        let mut s = DcLinkSettings::default();
        s.cycles = 5;
        assert!(simulate_np_voltages(StrategyId::Spwm, &op(2.5), (&CAP, &CAP), RedundancyPolicy::Symmetric, &s).is_err());
    }

    #[test]
    fn trace_export_has_three_columns() {
        let mut s = DcLinkSettings::default();
        s.trace_stride = 1000;
        let r = simulate_np_voltages(StrategyId::Spwm, &op(2.5), (&CAP, &CAP), RedundancyPolicy::Symmetric, &s).unwrap();
        let mut buf = Vec::new();
        write_trace(&mut buf, &r.trace).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "time_s V_C1_V V_C2_V");
        assert_eq!(lines.clone().count(), r.trace.len());
        assert!(lines.all(|l| l.split_whitespace().count() == 3));
    }

    proptest! {
        #[test]
        fn pi_v_increasing(s in 0.0f64..3.0, ds in 1e-6f64..1.0) {
            prop_assert!(pi_v(s + ds) > pi_v(s));
        }

        #[test]
        fn stress_linear(a in 0.0f64..300.0, b in 0.0f64..50.0, k in 0.0f64..3.0) {
            let s = voltage_stress(&AppliedVoltage { v_dc: k * a, v_ac: b }, &CAP);
            let lin = k * voltage_stress(&AppliedVoltage { v_dc: a, v_ac: 0.0 }, &CAP)
                + voltage_stress(&AppliedVoltage { v_dc: 0.0, v_ac: b }, &CAP);
            prop_assert!((s - lin).abs() < 1e-12 * (1.0 + s));
        }
    }
}
