//! CSV and JSON emission of result tables.
//!
//! Floats are written in shortest round-trip form; absent values are empty
//! CSV fields and JSON `null`.

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};

/// Shortest decimal string that parses back to exactly `x`.
pub fn format_f64(x: f64) -> String {
    format!("{x:?}")
}

pub fn format_opt_f64(x: Option<f64>) -> String {
    x.map(format_f64).unwrap_or_default()
}

pub fn format_opt<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// A record that can be written as a CSV row.
pub trait TableRow: Serialize {
    fn header() -> &'static [&'static str];
    fn fields(&self) -> Vec<String>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::domain(format!(
                "unknown output format '{other}', expected csv or json"
            ))),
        }
    }
}

fn io_err(e: impl std::fmt::Display) -> Error {
    Error::Output(e.to_string())
}

pub fn write_csv<R: TableRow, W: Write>(rows: &[R], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(R::header()).map_err(io_err)?;
    for row in rows {
        w.write_record(row.fields()).map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

pub fn write_json<R: TableRow, W: Write>(rows: &[R], mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, rows).map_err(io_err)?;
    out.write_all(b"\n").map_err(io_err)
}

pub fn write_table<R: TableRow, W: Write>(rows: &[R], format: OutputFormat, out: W) -> Result<()> {
    match format {
        OutputFormat::Csv => write_csv(rows, out),
        OutputFormat::Json => write_json(rows, out),
    }
}

pub fn render_table<R: TableRow>(rows: &[R], format: OutputFormat) -> Result<String> {
    let mut buf = Vec::new();
    write_table(rows, format, &mut buf)?;
    String::from_utf8(buf).map_err(io_err)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [
            0.1,
            1.0,
            6.24424736454095e-8,
            7.359078769598207e-4,
            1e300,
            5e-324,
        ] {
            let s = format_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
        assert_eq!(format_f64(0.25), "0.25");
        assert_eq!(format_opt_f64(None), "");
    }
}
