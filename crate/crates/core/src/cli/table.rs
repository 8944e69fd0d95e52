//! CSV tables written by the command-line tool.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::hedger::EvalReport;

pub const TABLE_HEADER: &str = "lambda,alpha,price,seed,n_test";

/// `%g`-style formatting with six significant digits.
pub fn sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if (-4..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        let s = format!("{x:.5e}");
        let (mant, e) = s.split_once('e').expect("exponent");
        let mant = if mant.contains('.') { mant.trim_end_matches('0').trim_end_matches('.') } else { mant };
        let e: i32 = e.parse().expect("exponent");
        format!("{mant}e{}{:02}", if e < 0 { '-' } else { '+' }, e.abs())
    }
}

/// One row per report, ordered by `lambda`.
pub fn format_table(reports: &[EvalReport]) -> String {
    let mut rows: Vec<&EvalReport> = reports.iter().collect();
    rows.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
    let mut out = format!("{TABLE_HEADER}\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{},{},{}", sig6(r.lambda), sig6(r.alpha_hat), sig6(r.price), r.seed, r.n_test);
    }
    out
}

pub fn write_table(reports: &[EvalReport], path: &Path) -> Result<()> {
    std::fs::write(path, format_table(reports))?;
    Ok(())
}

/// Write a header and rows of numbers.
pub fn write_csv(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(row.iter().map(|v| format!("{v}"))).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Read a numeric CSV written by [`write_csv`] or [`write_table`].
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    let header = r.headers().map_err(csv_err)?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_err)?;
        let row = rec
            .iter()
            .map(|f| f.parse::<f64>().map_err(|e| Error::config(format!("{}: bad number {f:?}: {e}", path.display()))))
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok((header, rows))
}

/// Column of a parsed CSV by name.
pub fn column(header: &[String], rows: &[Vec<f64>], name: &str) -> Result<Vec<f64>> {
    let j = header
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| Error::config(format!("missing column {name:?}")))?;
    Ok(rows.iter().map(|r| r[j]).collect())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e.to_string()))
}
