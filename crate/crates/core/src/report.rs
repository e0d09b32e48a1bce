//! CSV metric reports: `image,algorithm,mode,seed,mad,msd,pcqr,max_ref`.
//!
//! Floats are written in shortest round-trip form, so a report parses back to
//! the exact values that produced it. An infinite PCQR is written as `inf`.

use std::fs::OpenOptions;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::metrics::{MetricReport, Pcqr};

pub const HEADER: [&str; 8] = ["image", "algorithm", "mode", "seed", "mad", "msd", "pcqr", "max_ref"];

/// One run.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub image: String,
    pub algorithm: String,
    pub mode: String,
    pub seed: u64,
    pub mad: f64,
    pub msd: f64,
    pub pcqr: Pcqr,
    pub max_ref: f64,
}

impl ReportRow {
    pub fn new(image: impl Into<String>, algorithm: impl Into<String>, mode: impl Into<String>, seed: u64, m: &MetricReport) -> Self {
        Self {
            image: image.into(),
            algorithm: algorithm.into(),
            mode: mode.into(),
            seed,
            mad: m.mad,
            msd: m.msd,
            pcqr: m.pcqr,
            max_ref: m.max_ref,
        }
    }

    fn fields(&self) -> [String; 8] {
        [
            self.image.clone(),
            self.algorithm.clone(),
            self.mode.clone(),
            self.seed.to_string(),
            self.mad.to_string(),
            self.msd.to_string(),
            self.pcqr.to_string(),
            self.max_ref.to_string(),
        ]
    }
}

fn write_rows<W: Write>(w: W, rows: &[ReportRow], header: bool) -> Result<()> {
    let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    if header {
        out.write_record(HEADER)?;
    }
    for row in rows {
        out.write_record(row.fields())?;
    }
    out.flush()?;
    Ok(())
}

/// Report text with header.
pub fn to_csv_string(rows: &[ReportRow]) -> Result<String> {
    let mut buf = Vec::new();
    write_rows(&mut buf, rows, true)?;
    String::from_utf8(buf).map_err(|e| Error::Format(e.to_string()))
}

/// Appends rows, writing the header only to a new or empty file.
pub fn append_rows(path: &Path, rows: &[ReportRow]) -> Result<()> {
    let fresh = std::fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
    let file = OpenOptions::new().create(true).append(true).open(path)?;
    write_rows(file, rows, fresh)
}

fn parse_float(field: &str, name: &str) -> Result<f64> {
    field.trim().parse::<f64>().map_err(|_| Error::Format(format!("column `{name}`: `{field}` is not a number")))
}

/// Parses report text; the header must match exactly.
pub fn parse_report(text: &str) -> Result<Vec<ReportRow>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let header = reader.headers()?.clone();
    if header.iter().ne(HEADER.iter().copied()) {
        return Err(Error::Format(format!("unexpected report header `{}`", header.iter().collect::<Vec<_>>().join(","))));
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let rec = record?;
        if rec.len() != HEADER.len() {
            return Err(Error::Format(format!("report row has {} fields", rec.len())));
        }
        let pcqr = match rec[6].trim() {
            "inf" => Pcqr::Infinite,
            other => Pcqr::Finite(parse_float(other, "pcqr")?),
        };
        rows.push(ReportRow {
            image: rec[0].to_string(),
            algorithm: rec[1].to_string(),
            mode: rec[2].to_string(),
            seed: rec[3].trim().parse().map_err(|_| Error::Format(format!("column `seed`: `{}`", &rec[3])))?,
            mad: parse_float(&rec[4], "mad")?,
            msd: parse_float(&rec[5], "msd")?,
            pcqr,
            max_ref: parse_float(&rec[7], "max_ref")?,
        });
    }
    Ok(rows)
}

pub fn read_report(path: &Path) -> Result<Vec<ReportRow>> {
    parse_report(&std::fs::read_to_string(path)?)
}
