//! Three-level space-vector modulation expressed as per-region phase voltages.
//!
//! Over the 120° excursion `α ∈ [0, 2π/3]` (α measured on the cosine axis of
//! phase A) the normalised phase-A voltage is a piecewise expression chosen by
//! the modulation-index band and the sub-triangle the reference vector sits in.
//! Region edges follow from intersecting the reference circle with the inner
//! hexagon: for the middle band the circle enters the outer triangles at
//! `a1 = π/6 − acos(1/(2M))`, for the upper band it leaves the inner small
//! triangles at `b1 = acos(1/(2M)) − π/6`.
//!
//! The table expressions are written in units of `Vdc` against the scaled
//! magnitude `(√3/2)·M`; the reconstructed modulating function is therefore
//! `2·T((√3/2)·M, α)`. This reproduces the carrier-based double min-max offset
//! sample for sample (see the tests).

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_6, PI, TAU};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::check_modulation_index;
use crate::error::{Error, Result};

/// Upper end of the 120° excursion.
pub const EXCURSION: f64 = 2.0 * FRAC_PI_3;

const INV_SQRT3: f64 = 0.577_350_269_189_625_8;

/// Modulation-index band selecting one of the three region tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SvpwmBand {
    /// `0 < M ≤ 0.5`
    Low,
    /// `0.5 < M ≤ 1/√3`
    Mid,
    /// `1/√3 < M ≤ 1`
    High,
}

impl SvpwmBand {
    pub fn for_index(m: f64) -> Result<Self> {
        check_modulation_index(m)?;
        Ok(if m <= 0.5 {
            SvpwmBand::Low
        } else if m <= INV_SQRT3 {
            SvpwmBand::Mid
        } else {
            SvpwmBand::High
        })
    }

    pub fn region_count(self) -> usize {
        self.expressions().len()
    }

    fn expressions(self) -> &'static [RegionExpr] {
        use RegionExpr::*;
        match self {
            SvpwmBand::Low => &[Plus30, Cosine, Minus30, Plus30],
            SvpwmBand::Mid => &[
                Plus30,
                CosineLess,
                Plus30Raised,
                Cosine,
                Minus30,
                Plus30Raised,
                Minus30Less,
                Plus30,
            ],
            SvpwmBand::High => &[
                Minus30,
                CosineLess,
                Plus30Raised,
                Minus30,
                Cosine,
                Plus30Raised,
                Minus30Less,
                Cosine,
            ],
        }
    }
}

/// Region label `Δk`, `k` starting at 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RegionId(pub u8);

impl fmt::Display for RegionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Δ{}", self.0)
    }
}

/// The six distinct voltage expressions appearing in the region tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegionExpr {
    /// `(M/√3)·cos(α + π/6)`
    Plus30,
    /// `(M/√3)·cos(α + π/6) + 1/4`
    Plus30Raised,
    /// `(M/√3)·cos(α − π/6)`
    Minus30,
    /// `(M/√3)·cos(α − π/6) − 1/4`
    Minus30Less,
    /// `M·cos α`
    Cosine,
    /// `M·cos α − 1/4`
    CosineLess,
}

impl RegionExpr {
    pub fn eval(self, m: f64, alpha: f64) -> f64 {
        match self {
            RegionExpr::Plus30 => m * INV_SQRT3 * (alpha + FRAC_PI_6).cos(),
            RegionExpr::Plus30Raised => m * INV_SQRT3 * (alpha + FRAC_PI_6).cos() + 0.25,
            RegionExpr::Minus30 => m * INV_SQRT3 * (alpha - FRAC_PI_6).cos(),
            RegionExpr::Minus30Less => m * INV_SQRT3 * (alpha - FRAC_PI_6).cos() - 0.25,
            RegionExpr::Cosine => m * alpha.cos(),
            RegionExpr::CosineLess => m * alpha.cos() - 0.25,
        }
    }
}

/// One region: `[start, end)` in rad and its expression.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Region {
    pub id: RegionId,
    pub start: f64,
    pub end: f64,
    pub expr: RegionExpr,
}

/// Region partition of the excursion for one modulation index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvpwmRegionTable {
    m: f64,
    band: SvpwmBand,
    edges: [f64; 9],
}

impl SvpwmRegionTable {
    pub fn new(m: f64) -> Result<Self> {
        let band = SvpwmBand::for_index(m)?;
        let mut edges = [EXCURSION; 9];
        match band {
            SvpwmBand::Low => {
                edges[..5].copy_from_slice(&[0.0, FRAC_PI_6, FRAC_PI_3, FRAC_PI_2, EXCURSION]);
            }
            SvpwmBand::Mid | SvpwmBand::High => {
                let c = (1.0 / (2.0 * m)).min(1.0).acos();
                let d = if band == SvpwmBand::Mid { FRAC_PI_6 - c } else { c - FRAC_PI_6 };
                let d = d.clamp(0.0, FRAC_PI_6);
                edges = [
                    0.0,
                    d,
                    FRAC_PI_6,
                    FRAC_PI_3 - d,
                    FRAC_PI_3,
                    FRAC_PI_3 + d,
                    FRAC_PI_2,
                    EXCURSION - d,
                    EXCURSION,
                ];
            }
        }
        // rounding at M = 1 can leave π/3 + d a few ulps past π/2
        for k in 1..edges.len() {
            edges[k] = edges[k].max(edges[k - 1]);
        }
        Ok(Self { m, band, edges })
    }

    pub fn modulation_index(&self) -> f64 {
        self.m
    }

    pub fn band(&self) -> SvpwmBand {
        self.band
    }

    pub fn regions(&self) -> impl Iterator<Item = Region> + '_ {
        self.band.expressions().iter().enumerate().map(|(k, &expr)| Region {
            id: RegionId(k as u8 + 1),
            start: self.edges[k],
            end: self.edges[k + 1],
            expr,
        })
    }

    /// Region containing `alpha`; regions are half-open except the last.
    pub fn region(&self, alpha: f64) -> Result<Region> {
        if !(0.0..=EXCURSION).contains(&alpha) {
            return Err(Error::domain(format!(
                "angle {alpha} rad lies outside the 120° excursion [0, 2π/3]"
            )));
        }
        let n = self.band.region_count();
        // Degenerate (zero-width) regions at band edges are skipped naturally.
        let k = (0..n)
            .find(|&k| alpha < self.edges[k + 1])
            .unwrap_or(n - 1);
        Ok(self.regions().nth(k).expect("index within region count"))
    }

    /// Phase-A voltage inside the excursion, in units of `Vdc`.
    pub fn excursion_voltage(&self, alpha: f64) -> Result<f64> {
        let r = self.region(alpha)?;
        Ok(r.expr.eval(scaled(self.m), alpha))
    }

    /// Modulating function (units of `Vdc/2`) at any cosine-axis angle.
    pub fn modulating(&self, alpha: f64) -> f64 {
        // even in α, odd under a half-period shift
        let mut a = alpha.rem_euclid(TAU);
        if a > PI {
            a = TAU - a;
        }
        let (a, sign) = if a > EXCURSION { (PI - a, -1.0) } else { (a, 1.0) };
        let a = a.clamp(0.0, EXCURSION);
        let r = self.region(a).expect("angle reduced into the excursion");
        sign * 2.0 * r.expr.eval(scaled(self.m), a)
    }
}

fn scaled(m: f64) -> f64 {
    0.5 * 3f64.sqrt() * m
}

/// Region `Δk` holding the reference at angle `alpha` for index `m`.
pub fn svpwm_region(m: f64, alpha: f64) -> Result<RegionId> {
    Ok(SvpwmRegionTable::new(m)?.region(alpha)?.id)
}

/// Evaluates the tabulated expression of `region` in `band`, substituting `m`
/// for the table symbol `M` as printed (result in units of `Vdc`).
pub fn table_expression(band: SvpwmBand, region: RegionId, m: f64, alpha: f64) -> Result<f64> {
    let exprs = band.expressions();
    let k = region.0 as usize;
    if k == 0 || k > exprs.len() {
        return Err(Error::domain(format!("{band:?} band has no region {region}")));
    }
    Ok(exprs[k - 1].eval(m, alpha))
}

/// Modulating function for index `m` at cosine-axis angle `alpha`.
pub(crate) fn phase_reference(m: f64, alpha: f64) -> f64 {
    match SvpwmRegionTable::new(m) {
        Ok(t) => t.modulating(alpha),
        Err(_) => f64::NAN,
    }
}
