//! End-to-end evaluation: losses → temperatures → stress factors → failure
//! rates → MTTF, per strategy.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{FactorOverrides, RunConfig, VoltageSource};
use crate::dclink::{pi_v, simulate_np_voltages, voltage_stress, AppliedVoltage, CapacitorSpec};
use crate::error::{Error, Result, ResultExt};
use crate::losses::{loss_distribution, DeviceClass, DeviceRole, Leg, LossBreakdown, Quadrature};
use crate::modulation::StrategyId;
use crate::reliability::{
    contribution_shares, inverter_failure_rate, mttf, part_failure_rate, pi_cp, pi_s_diode, pi_t,
    Factor, PartClass, PartFailureRate, PartType, StressFactorSet,
};
use crate::thermal::{junction_temperature, TemperaturePair, ThermalPath};

/// Where the temperature and voltage factors come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Factors listed under `overrides` replace the computed ones.
    PaperFactors,
    /// Every factor is computed from the loss, thermal and DC-link models.
    Model,
}

impl Mode {
    pub fn key(self) -> &'static str {
        match self {
            Mode::PaperFactors => "paper-factors",
            Mode::Model => "model",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper-factors" | "paper" => Ok(Mode::PaperFactors),
            "model" => Ok(Mode::Model),
            other => Err(Error::config(format!("unknown evaluation mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceReport {
    pub role: DeviceRole,
    pub class: PartClass,
    pub losses: LossBreakdown,
    pub temperatures: TemperaturePair,
    pub factors: StressFactorSet,
    /// Factors taken from configuration overrides rather than computed.
    pub injected: Vec<String>,
    #[serde(rename = "lambda_1e-6_per_h")]
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacitorReport {
    pub name: String,
    pub applied: AppliedVoltage,
    pub voltage_stress: f64,
    pub factors: StressFactorSet,
    pub injected: Vec<String>,
    #[serde(rename = "lambda_1e-6_per_h")]
    pub rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassShare {
    pub class: PartClass,
    pub share_pct: f64,
}

/// Full evaluation of one strategy. Device entries describe leg A; the other
/// legs are identical and appear only in `parts`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyReport {
    pub strategy: StrategyId,
    pub mode: Mode,
    pub devices: Vec<DeviceReport>,
    pub capacitors: Vec<CapacitorReport>,
    pub parts: Vec<PartFailureRate>,
    #[serde(rename = "inverter_losses")]
    pub inverter_losses: LossBreakdown,
    #[serde(rename = "lambda_1e-6_per_h")]
    pub lambda_total: f64,
    #[serde(rename = "mttf_h")]
    pub mttf_hours: f64,
    pub shares: Vec<ClassShare>,
}

impl StrategyReport {
    pub fn device(&self, role: DeviceRole) -> &DeviceReport {
        &self.devices[role.index()]
    }

    /// Checks that the aggregate equals the sum of the parts and the MTTF its reciprocal.
    pub fn audit(&self) -> Result<()> {
        let sum: f64 = self.parts.iter().map(|p| p.rate).sum();
        if (sum - self.lambda_total).abs() > 1e-12 * sum.abs().max(1.0) {
            return Err(Error::Numeric(format!(
                "{}: aggregate rate {} differs from part sum {sum}",
                self.strategy, self.lambda_total
            )));
        }
        if (self.mttf_hours * self.lambda_total - 1e6).abs() > 1e-6 {
            return Err(Error::Numeric(format!("{}: MTTF is not the reciprocal rate", self.strategy)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub strategy: StrategyId,
    #[serde(rename = "lambda_1e-6_per_h")]
    pub lambda_total: f64,
    #[serde(rename = "mttf_h")]
    pub mttf_hours: f64,
    /// MTTF gain over the strategy with the shortest MTTF.
    #[serde(rename = "mttf_gain_vs_min_pct")]
    pub gain_vs_min_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseGain {
    pub strategy: StrategyId,
    pub baseline: StrategyId,
    #[serde(rename = "mttf_gain_pct")]
    pub gain_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub rows: Vec<ComparisonRow>,
    pub pairwise: Vec<PairwiseGain>,
}

impl Comparison {
    pub fn best(&self) -> StrategyId {
        self.rows
            .iter()
            .max_by(|a, b| a.mttf_hours.total_cmp(&b.mttf_hours))
            .map(|r| r.strategy)
            .expect("comparison has rows")
    }

    pub fn gain(&self, strategy: StrategyId, baseline: StrategyId) -> Option<f64> {
        self.pairwise
            .iter()
            .find(|p| p.strategy == strategy && p.baseline == baseline)
            .map(|p| p.gain_pct)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReliabilityReport {
    pub mode: Mode,
    pub strategies: Vec<StrategyReport>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub comparison: Option<Comparison>,
}

impl ReliabilityReport {
    pub fn strategy(&self, s: StrategyId) -> Option<&StrategyReport> {
        self.strategies.iter().find(|r| r.strategy == s)
    }
}

fn thermal_path(cfg: &RunConfig, class: DeviceClass) -> &ThermalPath {
    match class {
        DeviceClass::Switch => &cfg.thermal.switch,
        DeviceClass::Freewheel => &cfg.thermal.freewheel,
        DeviceClass::Clamp => &cfg.thermal.clamp,
    }
}

fn part_class(class: DeviceClass) -> PartClass {
    match class {
        DeviceClass::Switch => PartClass::Mosfet,
        DeviceClass::Freewheel => PartClass::FreewheelDiode,
        DeviceClass::Clamp => PartClass::ClampDiode,
    }
}

fn role_override(o: &FactorOverrides, role: DeviceRole) -> &StressFactorSet {
    use DeviceRole::*;
    match role {
        S1 | S4 => &o.s1_s4,
        S2 | S3 => &o.s2_s3,
        D1 | D2 | D3 | D4 => &o.d1_d4,
        D5 | D6 => &o.d5_d6,
    }
}

/// Applies `overrides` and lists which factors it replaced.
fn inject(factors: &mut StressFactorSet, overrides: &StressFactorSet) -> Vec<String> {
    let mut names = Vec::new();
    if overrides.lambda_b.is_some() {
        names.push("lambda_b".to_string());
    }
    for f in [Factor::T, Factor::A, Factor::Q, Factor::E, Factor::S, Factor::C, Factor::Cp, Factor::V, Factor::Sr] {
        if overrides.get(f).is_some() {
            names.push(f.name().to_string());
        }
    }
    factors.overlay(overrides);
    names
}

/// Mean and ripple voltages of both capacitors for `strategy`.
pub fn capacitor_voltages(
    cfg: &RunConfig,
    strategy: StrategyId,
    mode: Mode,
) -> Result<(AppliedVoltage, AppliedVoltage)> {
    let sc = cfg.strategy(strategy);
    if mode == Mode::Model && cfg.dclink.voltage_source == VoltageSource::Simulator {
        let r = simulate_np_voltages(
            strategy,
            &cfg.operating_point(),
            (&cfg.capacitors.c1, &cfg.capacitors.c2),
            sc.policy,
            &cfg.dclink_settings(),
        )?;
        Ok((r.c1, r.c2))
    } else {
        Ok((sc.applied.c1, sc.applied.c2))
    }
}

/// Deterministic full-chain evaluation of one strategy.
pub fn evaluate_strategy(cfg: &RunConfig, strategy: StrategyId, mode: Mode) -> Result<StrategyReport> {
    evaluate_inner(cfg, strategy, mode).context(|| strategy.to_string())
}

fn evaluate_inner(cfg: &RunConfig, strategy: StrategyId, mode: Mode) -> Result<StrategyReport> {
    let op = cfg.operating_point();
    let devices = cfg.device_set()?;
    let quad = cfg.quadrature()?;
    let sc = cfg.strategy(strategy);
    let dist = loss_distribution(&op, strategy, &devices, quad)?;

    let mut device_reports = Vec::with_capacity(10);
    for (role, losses) in &dist.roles {
        let class = role.class();
        let temperatures = junction_temperature(losses.total, op.ambient_temperature, thermal_path(cfg, class))
            .context(|| format!("{role} temperature"))?;
        let pclass = part_class(class);
        let mut factors = match class {
            DeviceClass::Switch => cfg.factors.mosfet,
            DeviceClass::Freewheel => cfg.factors.freewheel.factors,
            DeviceClass::Clamp => cfg.factors.clamp.factors,
        };
        factors.pi_t = Some(pi_t(pclass.part_type(), temperatures.t_junction));
        let vs = match class {
            DeviceClass::Switch => None,
            DeviceClass::Freewheel => Some(cfg.factors.freewheel.voltage_stress_ratio),
            DeviceClass::Clamp => Some(cfg.factors.clamp.voltage_stress_ratio),
        };
        if let Some(vs) = vs {
            factors.pi_s = Some(pi_s_diode(vs)?);
        }
        let injected = match mode {
            Mode::PaperFactors => inject(&mut factors, role_override(&sc.overrides, *role)),
            Mode::Model => Vec::new(),
        };
        let rate = part_failure_rate(pclass.part_type(), &factors).context(|| role.to_string())?;
        device_reports.push(DeviceReport {
            role: *role,
            class: pclass,
            losses: *losses,
            temperatures,
            factors,
            injected,
            rate,
        });
    }

    let (v1, v2) = capacitor_voltages(cfg, strategy, mode)?;
    let mut capacitors = Vec::with_capacity(2);
    for (name, spec, applied, over) in [
        ("C1", &cfg.capacitors.c1, v1, &sc.overrides.c1),
        ("C2", &cfg.capacitors.c2, v2, &sc.overrides.c2),
    ] {
        capacitors.push(capacitor_report(cfg, name, spec, applied, over, mode)?);
    }

    let mut parts = Vec::with_capacity(32);
    for leg in Leg::ALL {
        for d in &device_reports {
            parts.push(PartFailureRate {
                part: format!("{leg:?}.{}", d.role),
                class: d.class,
                rate: d.rate,
            });
        }
    }
    for c in &capacitors {
        parts.push(PartFailureRate { part: c.name.clone(), class: PartClass::Capacitor, rate: c.rate });
    }
    let lambda_total = inverter_failure_rate(&parts)?;
    let shares = contribution_shares(&parts)?
        .into_iter()
        .map(|(class, share_pct)| ClassShare { class, share_pct })
        .collect();
    Ok(StrategyReport {
        strategy,
        mode,
        devices: device_reports,
        capacitors,
        parts,
        inverter_losses: dist.inverter_total,
        lambda_total,
        mttf_hours: mttf(lambda_total)?,
        shares,
    })
}

fn capacitor_report(
    cfg: &RunConfig,
    name: &str,
    spec: &CapacitorSpec,
    applied: AppliedVoltage,
    over: &StressFactorSet,
    mode: Mode,
) -> Result<CapacitorReport> {
    let s = voltage_stress(&applied, spec);
    let mut factors = cfg.factors.capacitor;
    factors.pi_t = Some(pi_t(PartType::Capacitor, cfg.capacitors.hotspot_temperature));
    factors.pi_cp = Some(pi_cp(spec.capacitance_uf));
    factors.pi_v = Some(pi_v(s));
    factors.pi_q = Some(spec.pi_q);
    factors.pi_sr = Some(spec.pi_sr);
    let injected = match mode {
        Mode::PaperFactors => inject(&mut factors, over),
        Mode::Model => Vec::new(),
    };
    let rate = part_failure_rate(PartType::Capacitor, &factors).context(|| name.to_string())?;
    Ok(CapacitorReport { name: name.to_string(), applied, voltage_stress: s, factors, injected, rate })
}

/// Comparison rows and pairwise MTTF gains for a set of strategy reports.
pub fn comparison(reports: &[StrategyReport]) -> Comparison {
    let min = reports.iter().map(|r| r.mttf_hours).fold(f64::INFINITY, f64::min);
    let rows = reports
        .iter()
        .map(|r| ComparisonRow {
            strategy: r.strategy,
            lambda_total: r.lambda_total,
            mttf_hours: r.mttf_hours,
            gain_vs_min_pct: 100.0 * (r.mttf_hours / min - 1.0),
        })
        .collect();
    let mut pairwise = Vec::new();
    for a in reports {
        for b in reports {
            if a.strategy != b.strategy {
                pairwise.push(PairwiseGain {
                    strategy: a.strategy,
                    baseline: b.strategy,
                    gain_pct: 100.0 * (a.mttf_hours / b.mttf_hours - 1.0),
                });
            }
        }
    }
    Comparison { rows, pairwise }
}

/// Evaluates `strategies` in parallel; the report keeps the requested order.
pub fn evaluate(cfg: &RunConfig, strategies: &[StrategyId], mode: Mode) -> Result<ReliabilityReport> {
    let reports = strategies
        .par_iter()
        .map(|&s| evaluate_strategy(cfg, s, mode))
        .collect::<Result<Vec<_>>>()?;
    Ok(ReliabilityReport { mode, strategies: reports, comparison: None })
}

/// All three strategies with the comparison table.
pub fn compare_strategies(cfg: &RunConfig, mode: Mode) -> Result<ReliabilityReport> {
    let mut report = evaluate(cfg, &StrategyId::ALL, mode)?;
    report.comparison = Some(comparison(&report.strategies));
    Ok(report)
}

/// One point of a loss surface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfacePoint {
    pub modulation_index: f64,
    pub phase_lag_deg: f64,
    #[serde(rename = "s1_total_W")]
    pub s1_total: f64,
    #[serde(rename = "s2_total_W")]
    pub s2_total: f64,
    #[serde(rename = "leg_total_W")]
    pub leg_total: f64,
}

/// Modulation-index and lag-angle grid of the loss surfaces.
pub fn surface_grid() -> Vec<(f64, f64)> {
    let mut g = Vec::with_capacity(21 * 19);
    for i in 0..=20 {
        for j in 0..=18 {
            g.push((0.5 + 0.025 * i as f64, 5.0 * j as f64));
        }
    }
    g
}

/// Losses over [`surface_grid`] for one strategy.
pub fn loss_surface(cfg: &RunConfig, strategy: StrategyId) -> Result<Vec<SurfacePoint>> {
    let base = cfg.operating_point();
    let devices = cfg.device_set()?;
    let quad: Quadrature = cfg.quadrature()?;
    surface_grid()
        .into_par_iter()
        .map(|(m, phi_deg)| {
            let op = base.with_modulation_index(m).with_phase_lag(phi_deg.to_radians());
            let d = loss_distribution(&op, strategy, &devices, quad)
                .context(|| format!("{strategy} surface at M={m}, φ={phi_deg}°"))?;
            Ok(SurfacePoint {
                modulation_index: m,
                phase_lag_deg: phi_deg,
                s1_total: d.get(DeviceRole::S1).total,
                s2_total: d.get(DeviceRole::S2).total,
                leg_total: d.leg_total.total,
            })
        })
        .collect()
}
