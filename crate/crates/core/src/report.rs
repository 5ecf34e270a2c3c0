//! Report serialisation: JSON, CSV tables and plot data files.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result, ResultExt};
use crate::pipeline::{Comparison, ReliabilityReport, SurfacePoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Plotdata,
}

impl FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "plotdata" => Ok(Format::Plotdata),
            other => Err(Error::config(format!("unknown output format `{other}`"))),
        }
    }
}

pub fn to_json(report: &ReliabilityReport) -> Result<String> {
    let mut s = serde_json::to_string_pretty(report).map_err(|e| Error::Numeric(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn from_json(text: &str) -> Result<ReliabilityReport> {
    serde_json::from_str(text).map_err(|e| Error::config(format!("report JSON: {e}")))
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Numeric(format!("CSV: {other:?}")),
    }
}

#[derive(Serialize)]
struct PartRow<'a> {
    strategy: &'a str,
    mode: &'a str,
    part: &'a str,
    class: &'a str,
    #[serde(rename = "p_cond_W")]
    p_cond: Option<f64>,
    #[serde(rename = "p_sw_W")]
    p_sw: Option<f64>,
    #[serde(rename = "total_W")]
    total: Option<f64>,
    #[serde(rename = "tj_degC")]
    t_junction: Option<f64>,
    pi_t: Option<f64>,
    pi_s: Option<f64>,
    pi_v: Option<f64>,
    #[serde(rename = "lambda_1e-6_per_h")]
    rate: f64,
    injected: String,
}

/// One row per part: the ten devices of leg A and both capacitors.
pub fn write_parts_csv<W: Write>(w: W, report: &ReliabilityReport) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for s in &report.strategies {
        for d in &s.devices {
            let part = format!("A.{}", d.role);
            out.serialize(PartRow {
                strategy: s.strategy.name(),
                mode: s.mode.key(),
                part: &part,
                class: d.class.name(),
                p_cond: Some(d.losses.p_cond),
                p_sw: Some(d.losses.p_sw),
                total: Some(d.losses.total),
                t_junction: Some(d.temperatures.t_junction),
                pi_t: d.factors.pi_t,
                pi_s: d.factors.pi_s,
                pi_v: None,
                rate: d.rate,
                injected: d.injected.join(" "),
            })
            .map_err(csv_err)?;
        }
        for c in &s.capacitors {
            out.serialize(PartRow {
                strategy: s.strategy.name(),
                mode: s.mode.key(),
                part: &c.name,
                class: "capacitor",
                p_cond: None,
                p_sw: None,
                total: None,
                t_junction: None,
                pi_t: c.factors.pi_t,
                pi_s: None,
                pi_v: c.factors.pi_v,
                rate: c.rate,
                injected: c.injected.join(" "),
            })
            .map_err(csv_err)?;
        }
    }
    out.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct ComparisonCsvRow<'a> {
    strategy: &'a str,
    #[serde(rename = "lambda_1e-6_per_h")]
    rate: f64,
    #[serde(rename = "mttf_h")]
    mttf: f64,
    #[serde(rename = "mttf_gain_vs_min_pct")]
    gain: f64,
}

pub fn write_comparison_csv<W: Write>(w: W, comparison: &Comparison) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in &comparison.rows {
        out.serialize(ComparisonCsvRow {
            strategy: r.strategy.name(),
            rate: r.lambda_total,
            mttf: r.mttf_hours,
            gain: r.gain_vs_min_pct,
        })
        .map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_surface_csv<W: Write>(w: W, points: &[SurfacePoint]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for p in points {
        out.serialize(p).map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

/// Failure-rate share per part class, one block per strategy.
pub fn write_shares_csv<W: Write>(w: W, report: &ReliabilityReport) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["strategy", "class", "share_pct"]).map_err(csv_err)?;
    for s in &report.strategies {
        for sh in &s.shares {
            out.write_record([s.strategy.name(), sh.class.name(), &sh.share_pct.to_string()])
                .map_err(csv_err)?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Renders `report` as text. CSV output is the comparison table when the
/// report has one, otherwise the per-part table.
pub fn render(report: &ReliabilityReport, format: Format) -> Result<String> {
    let mut buf = Vec::new();
    match format {
        Format::Json => return to_json(report),
        Format::Csv => match &report.comparison {
            Some(c) => write_comparison_csv(&mut buf, c)?,
            None => write_parts_csv(&mut buf, report)?,
        },
        Format::Plotdata => write_shares_csv(&mut buf, report)?,
    }
    String::from_utf8(buf).map_err(|e| Error::Numeric(e.to_string()))
}

fn write_file(path: &Path, f: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<PathBuf> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    fs::write(path, buf).map_err(Error::from).context(|| format!("writing {}", path.display()))?;
    Ok(path.to_path_buf())
}

/// Writes the report files for `format` into `dir`, creating it if needed.
/// Plot data needs the configuration to recompute the loss surfaces.
pub fn emit_report(
    report: &ReliabilityReport,
    cfg: &crate::config::RunConfig,
    format: Format,
    dir: &Path,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(Error::from).context(|| format!("creating {}", dir.display()))?;
    let mut written = Vec::new();
    match format {
        Format::Json => {
            let text = to_json(report)?;
            let path = dir.join("report.json");
            fs::write(&path, text).map_err(Error::from).context(|| format!("writing {}", path.display()))?;
            written.push(path);
        }
        Format::Csv => {
            written.push(write_file(&dir.join("parts.csv"), |b| write_parts_csv(b, report))?);
            if let Some(c) = &report.comparison {
                written.push(write_file(&dir.join("comparison.csv"), |b| write_comparison_csv(b, c))?);
            }
        }
        Format::Plotdata => {
            written.push(write_file(&dir.join("shares.csv"), |b| write_shares_csv(b, report))?);
            for s in &report.strategies {
                let points = crate::pipeline::loss_surface(cfg, s.strategy)?;
                let path = dir.join(format!("loss_surface_{}.csv", s.strategy.key()));
                written.push(write_file(&path, |b| write_surface_csv(b, &points))?);
            }
        }
    }
    Ok(written)
}
