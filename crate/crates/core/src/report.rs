//! Flat row types with fixed column order, and their CSV or JSON writers.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::counting::{ActiveGapReport, FiberRecord, LatticeScan};
use crate::error::{Error, Result};
use crate::flatness::{FlatnessProfile, MonteCarloResult, OmegaEstimate};
use crate::normball::{AtomRecord, GapRecord, Sandwich, TailTurn};

/// Output encoding of row files.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            _ => Err(Error::InvalidInput(format!("unknown output format {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AtomRow {
    pub p: i64,
    pub q: i64,
    pub height: u64,
    pub atom_radians: f64,
}

impl From<&AtomRecord> for AtomRow {
    fn from(a: &AtomRecord) -> Self {
        Self {
            p: a.class.p(),
            q: a.class.q(),
            height: a.class.height(),
            atom_radians: a.atom.to_f64(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GapRow {
    pub u_p: i64,
    pub u_q: i64,
    pub v_p: i64,
    pub v_q: i64,
    pub mediant_height: u64,
    pub turn: f64,
    pub endpoint_defect: f64,
}

impl From<&GapRecord> for GapRow {
    fn from(g: &GapRecord) -> Self {
        Self {
            u_p: g.u.0,
            u_q: g.u.1,
            v_p: g.v.0,
            v_q: g.v.1,
            mediant_height: g.mediant.height(),
            turn: g.turn.to_f64(),
            endpoint_defect: g.endpoint_defect.to_f64(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TailTurnRow {
    #[serde(rename = "H")]
    pub h: u64,
    pub tail_from_atoms: f64,
    pub tail_from_gaps: f64,
    pub discrepancy: f64,
}

impl From<&TailTurn> for TailTurnRow {
    fn from(t: &TailTurn) -> Self {
        Self {
            h: t.h,
            tail_from_atoms: t.from_atoms.to_f64(),
            tail_from_gaps: t.from_gaps.to_f64(),
            discrepancy: t.discrepancy.to_f64(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PolygonRow {
    pub x: f64,
    pub y: f64,
}

/// Rows of one polygon of a sandwich, counterclockwise.
pub fn polygon_rows(s: &Sandwich, outer: bool) -> Vec<PolygonRow> {
    let pts = if outer { &s.outer } else { &s.inner };
    pts.iter().map(|p| PolygonRow { x: p[0], y: p[1] }).collect()
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FiberRow {
    pub m: String,
    pub size: usize,
    #[serde(rename = "L_m")]
    pub length: f64,
    pub bound_ratio: Option<f64>,
}

impl From<&FiberRecord> for FiberRow {
    fn from(f: &FiberRecord) -> Self {
        Self {
            m: f.m.to_string(),
            size: f.size,
            length: f.length.to_f64(),
            bound_ratio: f.bound_ratio,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct HistogramRow {
    pub level_id: usize,
    /// Exact trace on the modular torus, otherwise the length.
    pub trace_or_length: String,
    pub multiplicity: usize,
}

/// One row per level of a scan.
pub fn histogram_rows(scan: &LatticeScan, exact: bool) -> Vec<HistogramRow> {
    scan.levels
        .iter()
        .map(|l| HistogramRow {
            level_id: l.id,
            trace_or_length: if exact {
                l.trace.to_decimal_string()
            } else {
                let t = l.trace.to_f64();
                format!("{}", 2.0 * (t / 2.0).acosh())
            },
            multiplicity: l.multiplicity,
        })
        .collect()
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ActiveGapRow {
    #[serde(rename = "H")]
    pub h: u64,
    pub label: String,
    pub active_count: usize,
}

impl From<&ActiveGapReport> for ActiveGapRow {
    fn from(r: &ActiveGapReport) -> Self {
        Self {
            h: r.h,
            label: r.label.clone(),
            active_count: r.active_count,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct OmegaRow {
    #[serde(rename = "H")]
    pub h: u64,
    pub value: f64,
    pub witness_p: Option<i64>,
    pub witness_q: Option<i64>,
}

impl From<&OmegaEstimate> for OmegaRow {
    fn from(o: &OmegaEstimate) -> Self {
        let w = o.best();
        Self {
            h: o.h,
            value: o.value,
            witness_p: w.map(|w| w.p),
            witness_q: w.map(|w| w.q),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ProfilePointRow {
    pub j: usize,
    pub x: f64,
    pub f: f64,
    pub order: f64,
}

pub fn profile_rows(p: &FlatnessProfile) -> Vec<ProfilePointRow> {
    p.rows
        .iter()
        .map(|r| ProfilePointRow {
            j: r.j,
            x: r.x,
            f: r.f,
            order: r.order,
        })
        .collect()
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloRow {
    #[serde(rename = "H")]
    pub h: u64,
    pub eps: f64,
    pub fraction: f64,
}

pub fn monte_carlo_rows(m: &MonteCarloResult) -> Vec<MonteCarloRow> {
    m.epsilons
        .iter()
        .zip(&m.fractions)
        .map(|(&eps, &fraction)| MonteCarloRow { h: m.h, eps, fraction })
        .collect()
}

/// Writes rows with a header line, which is present even with no rows.
pub fn write_csv<T: Serialize + Default, W: Write>(mut out: W, rows: &[T]) -> Result<()> {
    if rows.is_empty() {
        // The header comes from a record, so serialize a default one and
        // keep only its first line.
        let mut w = csv::Writer::from_writer(Vec::new());
        w.serialize(T::default())?;
        let buf = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        let end = buf.iter().position(|&b| b == b'\n').map_or(buf.len(), |i| i + 1);
        out.write_all(&buf[..end])?;
        return Ok(());
    }
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes any serializable value as pretty JSON with a trailing newline.
pub fn write_json<T: Serialize + ?Sized, W: Write>(mut out: W, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n")?;
    Ok(())
}

/// Writes `rows` to `dir/name.{csv,json}` and returns the path.
pub fn write_rows<T: Serialize + Default>(dir: &Path, name: &str, format: OutputFormat, rows: &[T]) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(format!("{name}.{}", format.extension()));
    let out = BufWriter::new(File::create(&path)?);
    match format {
        OutputFormat::Csv => write_csv(out, rows)?,
        OutputFormat::Json => write_json(out, rows)?,
    }
    Ok(path)
}

/// Writes a JSON document to `dir/name.json` and returns the path.
pub fn write_document<T: Serialize + ?Sized>(dir: &Path, name: &str, value: &T) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(format!("{name}.json"));
    write_json(BufWriter::new(File::create(&path)?), value)?;
    Ok(path)
}
