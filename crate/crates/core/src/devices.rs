//! Static device characteristics: linear on-state models, double-exponential
//! commutation-energy fits and a small named device library.

use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::{DMatrix, DVector, Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::thermal::ThermalPath;

/// Scale of the coefficients `a` and `c` of an [`EnergyFit`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum EnergyUnit {
    #[default]
    #[serde(rename = "J")]
    Joule,
    #[serde(rename = "mJ")]
    Millijoule,
}

impl EnergyUnit {
    pub fn to_joules(self) -> f64 {
        match self {
            EnergyUnit::Joule => 1.0,
            EnergyUnit::Millijoule => 1e-3,
        }
    }
}

/// `E(I) = a·e^(b·I) + c·e^(d·I)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyFit {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    #[serde(default)]
    pub unit: EnergyUnit,
}

impl EnergyFit {
    /// Coefficients in joules.
    pub const fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self { a, b, c, d, unit: EnergyUnit::Joule }
    }

    pub const fn with_unit(mut self, unit: EnergyUnit) -> Self {
        self.unit = unit;
        self
    }

    pub const ZERO: EnergyFit = EnergyFit::new(0.0, 0.0, 0.0, 0.0);

    /// Raw curve value in the fit's own unit.
    pub fn value(&self, i: f64) -> f64 {
        self.a * (self.b * i).exp() + self.c * (self.d * i).exp()
    }

    /// Curve value in joules, without the validity check.
    pub(crate) fn joules(&self, i: f64) -> f64 {
        self.value(i) * self.unit.to_joules()
    }

    /// Checks non-negativity on `[0, i_max]` by dense sampling.
    pub fn check_range(&self, i_max: f64) -> Result<()> {
        let n = 256;
        for k in 0..=n {
            let i = i_max * k as f64 / n as f64;
            let e = self.value(i);
            if !(e >= 0.0) {
                return Err(Error::ModelValidity(format!(
                    "energy fit gives {e:.4e} at {i:.3} A; outside its valid current range"
                )));
            }
        }
        Ok(())
    }
}

/// Turn-on energy of an IRF740 versus drain current.
pub const IRF740_EON: EnergyFit = EnergyFit::new(0.0048, 0.0044, -0.00433, -0.008);
/// Turn-off energy of an IRF740.
pub const IRF740_EOFF: EnergyFit = EnergyFit::new(0.0126, -0.00107, -0.0102, 0.00021);
/// Reverse-recovery energy of an MUR1560.
pub const MUR1560_EREC: EnergyFit = EnergyFit::new(0.00806, -0.000322, -0.0057, -0.00446);

/// Energy of one commutation at current magnitude `i`, in joules.
pub fn commutation_energy(fit: &EnergyFit, i: f64) -> Result<f64> {
    if !(i >= 0.0) {
        return Err(Error::domain(format!(
            "commutation energy needs a current magnitude, got {i} A"
        )));
    }
    let e = fit.joules(i);
    if e < 0.0 || !e.is_finite() {
        return Err(Error::ModelValidity(format!(
            "energy fit gives {e:.4e} J at {i} A; outside its valid current range"
        )));
    }
    Ok(e)
}

/// Linear on-state model `v = v0 + r·i` shared by switches and diodes.
pub trait OnState {
    fn threshold(&self) -> f64;
    fn slope(&self) -> f64;

    fn on_state_voltage(&self, i: f64) -> Result<f64> {
        if !(i >= 0.0) {
            return Err(Error::domain(format!(
                "on-state voltage needs a forward current, got {i} A"
            )));
        }
        Ok(self.threshold() + self.slope() * i)
    }
}

/// Forward drop of a switch or diode at current `i ≥ 0`.
pub fn on_state_voltage(device: &impl OnState, i: f64) -> Result<f64> {
    device.on_state_voltage(i)
}

/// Active switch linearised through `(0, v_ceo)` and `(i_cn, v_cen)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwitchPhysics {
    pub v_ceo: f64,
    pub v_cen: f64,
    pub i_cn: f64,
    pub eon: EnergyFit,
    pub eoff: EnergyFit,
}

impl SwitchPhysics {
    /// Builds the rated point from a threshold and slope resistance.
    pub fn linear(v_ceo: f64, r_s: f64, i_cn: f64, eon: EnergyFit, eoff: EnergyFit) -> Self {
        Self { v_ceo, v_cen: v_ceo + r_s * i_cn, i_cn, eon, eoff }
    }

    pub fn r_s(&self) -> f64 {
        (self.v_cen - self.v_ceo) / self.i_cn
    }

    pub fn validate(&self) -> Result<()> {
        validate_linearization("switch", self.v_ceo, self.v_cen, self.i_cn)
    }
}

impl OnState for SwitchPhysics {
    fn threshold(&self) -> f64 {
        self.v_ceo
    }
    fn slope(&self) -> f64 {
        self.r_s()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiodePhysics {
    pub v_fo: f64,
    pub v_fn: f64,
    pub i_cn: f64,
    pub erec: EnergyFit,
    pub v_rev_rated: f64,
}

impl DiodePhysics {
    pub fn linear(v_fo: f64, r_d: f64, i_cn: f64, erec: EnergyFit, v_rev_rated: f64) -> Self {
        Self { v_fo, v_fn: v_fo + r_d * i_cn, i_cn, erec, v_rev_rated }
    }

    pub fn r_d(&self) -> f64 {
        (self.v_fn - self.v_fo) / self.i_cn
    }

    pub fn validate(&self) -> Result<()> {
        validate_linearization("diode", self.v_fo, self.v_fn, self.i_cn)?;
        if !(self.v_rev_rated > 0.0) {
            return Err(Error::config(format!(
                "diode rated reverse voltage must be positive, got {}",
                self.v_rev_rated
            )));
        }
        Ok(())
    }
}

impl OnState for DiodePhysics {
    fn threshold(&self) -> f64 {
        self.v_fo
    }
    fn slope(&self) -> f64 {
        self.r_d()
    }
}

fn validate_linearization(kind: &str, v0: f64, vn: f64, i_n: f64) -> Result<()> {
    if !(i_n > 0.0) {
        return Err(Error::config(format!("{kind} rated current must be positive, got {i_n}")));
    }
    if !(v0 >= 0.0) {
        return Err(Error::config(format!("{kind} threshold voltage must be non-negative, got {v0}")));
    }
    if !(vn >= v0) {
        return Err(Error::config(format!(
            "{kind} rated on-voltage {vn} V is below its threshold {v0} V"
        )));
    }
    Ok(())
}

/// Either kind of library device.
#[derive(Debug, Clone, PartialEq)]
pub enum DevicePhysics {
    Switch(SwitchPhysics),
    Diode(DiodePhysics),
}

impl DevicePhysics {
    pub fn on_state_voltage(&self, i: f64) -> Result<f64> {
        match self {
            DevicePhysics::Switch(s) => s.on_state_voltage(i),
            DevicePhysics::Diode(d) => d.on_state_voltage(i),
        }
    }
}

/// The three device types populating one NPC leg.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceSet {
    pub switch: SwitchPhysics,
    /// Anti-parallel diodes across S1..S4.
    pub freewheel: DiodePhysics,
    /// Neutral-point clamping diodes.
    pub clamp: DiodePhysics,
}

impl DeviceSet {
    pub fn validate(&self) -> Result<()> {
        self.switch.validate()?;
        self.freewheel.validate()?;
        self.clamp.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwitchEntry {
    #[serde(flatten)]
    pub physics: SwitchPhysics,
    #[serde(default)]
    pub thermal: Option<ThermalPath>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiodeEntry {
    #[serde(flatten)]
    pub physics: DiodePhysics,
    #[serde(default)]
    pub thermal: Option<ThermalPath>,
}

/// Named devices loaded from a TOML document.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DeviceLibrary {
    #[serde(default)]
    pub switches: BTreeMap<String, SwitchEntry>,
    #[serde(default)]
    pub diodes: BTreeMap<String, DiodeEntry>,
}

const BUILTIN_LIBRARY: &str = include_str!("../config/devices.toml");

impl DeviceLibrary {
    /// Library shipped with the crate (IRF740, MUR1560).
    pub fn builtin() -> Self {
        Self::from_toml(BUILTIN_LIBRARY).expect("embedded device library is valid")
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let lib: DeviceLibrary = toml::from_str(text)
            .map_err(|e| Error::config(format!("device library: {e}")))?;
        for (name, s) in &lib.switches {
            s.physics.validate().map_err(|e| e.context(format!("switch `{name}`")))?;
        }
        for (name, d) in &lib.diodes {
            d.physics.validate().map_err(|e| e.context(format!("diode `{name}`")))?;
        }
        Ok(lib)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::from(e).context(format!("reading {}", path.display())))?;
        Self::from_toml(&text).map_err(|e| e.context(path.display().to_string()))
    }

    pub fn switch(&self, name: &str) -> Result<&SwitchEntry> {
        self.switches
            .get(name)
            .ok_or_else(|| Error::config(format!("switch `{name}` is not in the device library")))
    }

    pub fn diode(&self, name: &str) -> Result<&DiodeEntry> {
        self.diodes
            .get(name)
            .ok_or_else(|| Error::config(format!("diode `{name}` is not in the device library")))
    }

    /// Merges `other` into `self`; entries of `other` win on name clashes.
    pub fn extend(&mut self, other: DeviceLibrary) {
        self.switches.extend(other.switches);
        self.diodes.extend(other.diodes);
    }
}

/// Outcome of [`fit_energy_curve`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitReport {
    pub fit: EnergyFit,
    /// Root-mean-square residual, same unit as the samples.
    pub rms: f64,
    pub iterations: usize,
}

const FIT_MAX_ITER: usize = 500;

/// Least-squares double-exponential fit to `(current, energy)` samples.
///
/// The linear amplitudes are eliminated (variable projection) and the two
/// exponents are refined by Levenberg-Marquardt on scaled variables. Equally
/// spaced samples are seeded with a Prony estimate, others with a coarse grid.
pub fn fit_energy_curve(samples: &[(f64, f64)]) -> Result<FitReport> {
    if samples.len() < 4 {
        return Err(Error::domain(format!(
            "a double-exponential fit needs at least 4 samples, got {}",
            samples.len()
        )));
    }
    if samples.iter().any(|&(i, e)| !i.is_finite() || !e.is_finite()) {
        return Err(Error::domain("fit samples must be finite"));
    }
    let mut pts = samples.to_vec();
    pts.sort_by(|p, q| p.0.total_cmp(&q.0));
    if pts.windows(2).any(|w| w[0].0 == w[1].0) {
        return Err(Error::domain("fit samples must have distinct currents"));
    }

    let x_scale = pts.iter().map(|p| p.0.abs()).fold(0.0, f64::max).max(1e-300);
    let y_scale = pts.iter().map(|p| p.1.abs()).fold(0.0, f64::max);
    if y_scale == 0.0 {
        return Ok(FitReport { fit: EnergyFit::ZERO, rms: 0.0, iterations: 0 });
    }
    let x = DVector::from_iterator(pts.len(), pts.iter().map(|p| p.0 / x_scale));
    let y = DVector::from_iterator(pts.len(), pts.iter().map(|p| p.1 / y_scale));

    let mean = y.mean();
    if y.iter().all(|&v| (v - mean).abs() <= 1e-14) {
        let fit = EnergyFit::new(mean * y_scale, 0.0, 0.0, 0.0);
        return Ok(FitReport { fit, rms: rms_of(&pts, &fit), iterations: 0 });
    }

    let start = prony_seed(&x, &y).unwrap_or_else(|| grid_seed(&x, &y));
    let (theta, iterations) = levenberg_marquardt(&x, &y, start)?;
    let (amp, _) = project(&x, &y, theta);
    let fit = EnergyFit::new(
        amp[0] * y_scale,
        theta[0] / x_scale,
        amp[1] * y_scale,
        theta[1] / x_scale,
    );
    let rms = rms_of(&pts, &fit);
    if !rms.is_finite() {
        return Err(Error::Fit { message: "fit diverged".into(), iterations, rms });
    }
    Ok(FitReport { fit, rms, iterations })
}

fn rms_of(pts: &[(f64, f64)], fit: &EnergyFit) -> f64 {
    let ss: f64 = pts.iter().map(|&(i, e)| (fit.value(i) - e).powi(2)).sum();
    (ss / pts.len() as f64).sqrt()
}

/// Optimal amplitudes and residual for fixed exponents.
fn project(x: &DVector<f64>, y: &DVector<f64>, theta: Vector2<f64>) -> (Vector2<f64>, DVector<f64>) {
    let n = x.len();
    let phi = DMatrix::from_fn(n, 2, |r, c| (theta[c] * x[r]).exp());
    let svd = phi.clone().svd(true, true);
    let amp = svd
        .solve(y, 1e-13 * svd.singular_values.max())
        .unwrap_or_else(|_| DVector::zeros(2));
    let resid = y - &phi * &amp;
    (Vector2::new(amp[0], amp[1]), resid)
}

fn levenberg_marquardt(
    x: &DVector<f64>,
    y: &DVector<f64>,
    start: Vector2<f64>,
) -> Result<(Vector2<f64>, usize)> {
    let mut theta = start;
    let (_, mut r) = project(x, y, theta);
    let mut cost = r.norm_squared();
    let mut lambda = 1e-3;
    let tiny = 1e-30 * y.norm_squared();

    for iter in 1..=FIT_MAX_ITER {
        if cost <= tiny {
            return Ok((theta, iter - 1));
        }
        // central-difference Jacobian of the projected residual
        let mut jac = DMatrix::zeros(x.len(), 2);
        for k in 0..2 {
            let h = 1e-6 * theta[k].abs().max(1e-2);
            let mut tp = theta;
            let mut tm = theta;
            tp[k] += h;
            tm[k] -= h;
            let (_, rp) = project(x, y, tp);
            let (_, rm) = project(x, y, tm);
            jac.set_column(k, &((rp - rm) / (2.0 * h)));
        }
        let jtj: Matrix2<f64> = (jac.transpose() * &jac).fixed_view::<2, 2>(0, 0).into_owned();
        let jtr = jac.transpose() * &r;
        let g = Vector2::new(jtr[0], jtr[1]);

        let mut accepted = false;
        for _ in 0..40 {
            let mut a = jtj;
            for k in 0..2 {
                a[(k, k)] += lambda * jtj[(k, k)].max(1e-300);
            }
            let Some(step) = a.lu().solve(&(-g)) else {
                lambda *= 10.0;
                continue;
            };
            let cand = theta + step;
            let (_, rc) = project(x, y, cand);
            let c = rc.norm_squared();
            if c.is_finite() && c < cost {
                let small = step.norm() <= 1e-15 * (1.0 + theta.norm());
                let flat = cost - c <= 1e-15 * cost;
                theta = cand;
                r = rc;
                cost = c;
                lambda = (lambda / 3.0).max(1e-15);
                accepted = true;
                if small || flat {
                    return Ok((theta, iter));
                }
                break;
            }
            lambda *= 4.0;
        }
        if !accepted {
            // no descent direction left: a local minimum at working precision
            return Ok((theta, iter));
        }
    }
    Err(Error::Fit {
        message: "exponent iteration did not settle".into(),
        iterations: FIT_MAX_ITER,
        rms: (cost / x.len() as f64).sqrt(),
    })
}

/// Prony estimate of the two exponents from equally spaced samples.
fn prony_seed(x: &DVector<f64>, y: &DVector<f64>) -> Option<Vector2<f64>> {
    let n = x.len();
    let h = x[1] - x[0];
    if (1..n).any(|k| ((x[k] - x[k - 1]) - h).abs() > 1e-9 * h.abs()) {
        return None;
    }
    // y[k+2] = p·y[k+1] + q·y[k]
    let rows = n - 2;
    let a = DMatrix::from_fn(rows, 2, |r, c| if c == 0 { y[r + 1] } else { y[r] });
    let rhs = DVector::from_fn(rows, |r, _| y[r + 2]);
    let pq = a.svd(true, true).solve(&rhs, 1e-14).ok()?;
    let (p, q) = (pq[0], pq[1]);
    let disc = p * p + 4.0 * q;
    if disc <= 0.0 {
        return None;
    }
    let z1 = 0.5 * (p + disc.sqrt());
    let z2 = 0.5 * (p - disc.sqrt());
    if z1 <= 0.0 || z2 <= 0.0 {
        return None;
    }
    let s = Vector2::new(z1.ln() / h, z2.ln() / h);
    s.iter().all(|v| v.is_finite()).then_some(s)
}

fn grid_seed(x: &DVector<f64>, y: &DVector<f64>) -> Vector2<f64> {
    let grid: Vec<f64> = (-20..=20).map(|k| k as f64 * 0.25).collect();
    let mut best = (f64::INFINITY, Vector2::new(0.5, -0.5));
    for (i, &b) in grid.iter().enumerate() {
        for &d in &grid[i + 1..] {
            let t = Vector2::new(b, d);
            let (_, r) = project(x, y, t);
            let c = r.norm_squared();
            if c < best.0 {
                best = (c, t);
            }
        }
    }
    best.1
}
