//! CSV and JSON formats for series, samples, points, functions and reports.
//!
//! Floats are written in shortest round-trip exponent form, so output is
//! byte-identical for identical inputs. Readers report the offending line.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kaczmarz::FourierData;
use crate::measure::{AtomicMeasure, MeasureSpec, MuFunction};
use crate::sampling::{ReconstructionReport, SampleSet};
use crate::transforms::PowerSeries;

/// Formats a float so that parsing it back yields the same bits.
pub fn fmt_f64(x: f64) -> String {
    // Adding zero maps -0 to 0.
    format!("{:e}", x + 0.0)
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        kind => Error::Parse { line, message: format!("{kind:?}") },
    }
}

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().has_headers(false).from_writer(w)
}

fn write_rows<W: Write>(w: W, header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<()> {
    let mut out = writer(w);
    out.write_record(header).map_err(csv_error)?;
    for row in rows {
        out.write_record(&row).map_err(csv_error)?;
    }
    out.flush()?;
    Ok(())
}

/// Reads every record below the header, checking the column names.
fn read_rows<R: Read>(r: R, header: &[&str]) -> Result<Vec<(u64, csv::StringRecord)>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(r);
    let found = rdr.headers().map_err(csv_error)?.clone();
    if found.iter().ne(header.iter().copied()) {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected header {:?}, found {:?}", header.join(","), found.iter().collect::<Vec<_>>().join(",")),
        });
    }
    let mut rows = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map_or(0, |p| p.line());
        rows.push((line, record));
    }
    Ok(rows)
}

fn field<T: std::str::FromStr>(record: &csv::StringRecord, line: u64, i: usize, name: &str) -> Result<T> {
    let raw = record.get(i).ok_or_else(|| Error::Parse { line, message: format!("missing column {name}") })?;
    raw.parse().map_err(|_| Error::Parse { line, message: format!("invalid {name}: {raw:?}") })
}

fn finite(x: f64, line: u64, name: &str) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::Parse { line, message: format!("{name} is not finite") })
    }
}

fn complex_at(record: &csv::StringRecord, line: u64, i: usize) -> Result<Complex64> {
    let re = finite(field(record, line, i, "re")?, line, "re")?;
    let im = finite(field(record, line, i + 1, "im")?, line, "im")?;
    Ok(Complex64::new(re, im))
}

/// Reads `index,re,im` rows whose index runs `0, 1, 2, …`.
fn read_indexed<R: Read>(r: R, header: &[&str]) -> Result<Vec<Complex64>> {
    let rows = read_rows(r, header)?;
    let mut values = Vec::with_capacity(rows.len());
    for (expected, (line, record)) in rows.iter().enumerate() {
        let index: usize = field(record, *line, 0, header[0])?;
        if index != expected {
            return Err(Error::Parse { line: *line, message: format!("expected {} = {expected}, found {index}", header[0]) });
        }
        values.push(complex_at(record, *line, 1)?);
    }
    if values.is_empty() {
        return Err(Error::Parse { line: 1, message: "no data rows".into() });
    }
    Ok(values)
}

fn indexed_rows(values: &[Complex64]) -> impl Iterator<Item = Vec<String>> + '_ {
    values.iter().enumerate().map(|(n, c)| vec![n.to_string(), fmt_f64(c.re), fmt_f64(c.im)])
}

pub fn write_series_csv<W: Write>(w: W, series: &PowerSeries) -> Result<()> {
    write_rows(w, &["n", "re", "im"], indexed_rows(series.coefficients()))
}

pub fn read_series_csv<R: Read>(r: R) -> Result<PowerSeries> {
    PowerSeries::new(read_indexed(r, &["n", "re", "im"])?)
}

/// Sidecar written next to a series CSV.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesMeta {
    pub order: usize,
    pub residual: f64,
}

pub fn write_fourier_csv<W: Write>(w: W, data: &FourierData) -> Result<()> {
    let energy = data.cumulative_energy();
    let rows = data.coefficients().iter().zip(energy).enumerate().map(|(n, (c, e))| {
        vec![n.to_string(), fmt_f64(c.re), fmt_f64(c.im), fmt_f64(e)]
    });
    write_rows(w, &["n", "re", "im", "cumulative_energy"], rows)
}

/// Summary of one Parseval experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParsevalRecord {
    pub order: usize,
    pub defect: f64,
    pub wall_time: f64,
}

pub fn write_samples_csv<W: Write>(w: W, samples: &SampleSet) -> Result<()> {
    write_rows(w, &["j", "re", "im"], indexed_rows(samples.values()))
}

pub fn read_samples_csv<R: Read>(r: R) -> Result<SampleSet> {
    SampleSet::new(read_indexed(r, &["j", "re", "im"])?)
}

pub fn write_points_csv<W: Write>(w: W, points: &[Complex64]) -> Result<()> {
    write_rows(w, &["re", "im"], points.iter().map(|z| vec![fmt_f64(z.re), fmt_f64(z.im)]))
}

pub fn read_points_csv<R: Read>(r: R) -> Result<Vec<Complex64>> {
    read_rows(r, &["re", "im"])?.iter().map(|(line, rec)| complex_at(rec, *line, 0)).collect()
}

/// Largest accepted gap between a listed position and its atom.
const POSITION_TOL: f64 = 1e-12;

/// Function values on the atoms of `m`, one row per atom in order.
pub fn write_function_csv<W: Write>(w: W, m: &AtomicMeasure, f: &MuFunction) -> Result<()> {
    let rows = m.positions().iter().zip(f.values()).enumerate().map(|(k, (x, v))| {
        vec![k.to_string(), fmt_f64(*x), fmt_f64(v.re), fmt_f64(v.im)]
    });
    write_rows(w, &["k", "x", "re", "im"], rows)
}

pub fn read_function_csv<R: Read>(r: R, m: &AtomicMeasure) -> Result<MuFunction> {
    let rows = read_rows(r, &["k", "x", "re", "im"])?;
    let mut values = Vec::with_capacity(rows.len());
    for (expected, (line, record)) in rows.iter().enumerate() {
        let k: usize = field(record, *line, 0, "k")?;
        if k != expected {
            return Err(Error::Parse { line: *line, message: format!("expected k = {expected}, found {k}") });
        }
        let x: f64 = field(record, *line, 1, "x")?;
        if let Some(&p) = m.positions().get(k) {
            if (x - p).abs() > POSITION_TOL {
                return Err(Error::Parse { line: *line, message: format!("x = {x} does not match atom {k} at {p}") });
            }
        }
        values.push(complex_at(record, *line, 2)?);
    }
    MuFunction::new(m, values)
}

pub fn write_reconstruction_csv<W: Write>(w: W, reports: &[ReconstructionReport]) -> Result<()> {
    let rows = reports.iter().map(|r| {
        vec![
            fmt_f64(r.point.re),
            fmt_f64(r.point.im),
            fmt_f64(r.reconstructed.re),
            fmt_f64(r.reconstructed.im),
            r.error().map(fmt_f64).unwrap_or_default(),
            r.truncation_order.to_string(),
        ]
    });
    write_rows(w, &["re_z", "im_z", "re_F", "im_F", "err", "order"], rows)
}

/// One row of long-format plot data.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotRow {
    pub series: String,
    pub x: f64,
    pub y: f64,
}

impl PlotRow {
    pub fn new(series: impl Into<String>, x: f64, y: f64) -> Self {
        Self { series: series.into(), x, y }
    }
}

pub fn write_plotdata_csv<W: Write>(w: W, rows: &[PlotRow]) -> Result<()> {
    write_rows(
        w,
        &["series_name", "x", "y"],
        rows.iter().map(|r| vec![r.series.clone(), fmt_f64(r.x), fmt_f64(r.y)]),
    )
}

/// Writes a table of pre-formatted cells under `header`.
pub fn write_table<W: Write>(w: W, header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<()> {
    write_rows(w, header, rows)
}

/// Converts a report CSV into long-format plot rows.
///
/// Reconstruction reports plot `err` against the point index and series
/// files plot `|cₙ|`. Any other table plots each column against the first.
pub fn plot_rows<R: Read>(r: R) -> Result<Vec<PlotRow>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(r);
    let header: Vec<String> = rdr.headers().map_err(csv_error)?.iter().map(str::to_owned).collect();
    if header.len() < 2 {
        return Err(Error::Parse { line: 1, message: "a report needs at least two columns".into() });
    }
    let cols: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut rows = Vec::new();
    for (index, record) in rdr.records().enumerate() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map_or(0, |p| p.line());
        let number = |i: usize| -> Result<Option<f64>> {
            match record.get(i) {
                Some("") => Ok(None),
                Some(_) => field(&record, line, i, cols[i]).map(Some),
                None => Err(Error::Parse { line, message: format!("missing column {}", cols[i]) }),
            }
        };
        match cols.as_slice() {
            ["re_z", "im_z", "re_F", "im_F", "err", "order"] => {
                if let Some(err) = number(4)? {
                    rows.push(PlotRow::new("err", index as f64, err));
                }
            }
            ["n", "re", "im"] | ["j", "re", "im"] => {
                let x = number(0)?.unwrap_or(index as f64);
                let v = Complex64::new(number(1)?.unwrap_or(0.0), number(2)?.unwrap_or(0.0));
                rows.push(PlotRow::new("abs", x, v.norm()));
            }
            _ => {
                let Some(x) = number(0)? else { continue };
                for (i, name) in cols.iter().enumerate().skip(1) {
                    if let Some(y) = number(i)? {
                        rows.push(PlotRow::new(*name, x, y));
                    }
                }
            }
        }
    }
    rows.sort_by(|a, b| a.series.cmp(&b.series));
    Ok(rows)
}

/// Reads a measure document, reporting JSON syntax errors with their line.
pub fn read_measure_json(text: &str) -> Result<MeasureSpec> {
    MeasureSpec::from_json(text).map_err(|e| match e {
        Error::Json(j) => Error::Parse { line: j.line() as u64, message: j.to_string() },
        other => other,
    })
}

/// Writes `bytes` to `path` through a sibling temporary file and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().ok_or_else(|| Error::InvalidArgument(format!("not a file path: {}", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    {
        let mut file = fs::File::create(&tmp)?;
        file.write_all(bytes)?;
        file.sync_all()?;
    }
    fs::rename(&tmp, path).inspect_err(|_| {
        let _ = fs::remove_file(&tmp);
    })?;
    Ok(())
}

/// Serializes `value` as pretty JSON with a trailing newline.
pub fn to_json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}
