use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};

/// Formats `v` with 12 significant digits, positional when the exponent is
/// moderate and scientific otherwise, without trailing zeros.
pub fn fmt_real(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{v:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        let s = format!("{:.*}", (11 - exp) as usize, v);
        trim_zeros(&s).to_string()
    } else {
        format!("{}e{exp}", trim_zeros(mantissa))
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// A CSV table under construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Table {
            name: name.to_string(),
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn with_header(name: &str, header: Vec<String>) -> Self {
        Table {
            name: name.to_string(),
            header,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn file_name(&self) -> String {
        format!("{}.csv", self.name)
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.into_inner().map_err(|e| Error::Config(format!("csv buffer: {e}")))
    }

    /// Whitespace-separated columns with a `#` header line; text fields are
    /// double-quoted.
    pub fn to_gnuplot(&self) -> String {
        let mut out = format!("# {}\n", self.header.join(" "));
        for r in &self.rows {
            let cells: Vec<String> = r
                .iter()
                .map(|c| {
                    if c.parse::<f64>().is_ok() || c == "nan" || c == "inf" || c == "-inf" {
                        c.clone()
                    } else {
                        format!("\"{c}\"")
                    }
                })
                .collect();
            out.push_str(&cells.join(" "));
            out.push('\n');
        }
        out
    }
}

pub(crate) fn r(v: f64) -> String {
    fmt_real(v)
}

pub(crate) fn n(v: usize) -> String {
    v.to_string()
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, Serialize)]
pub struct OutputRecord {
    pub file: String,
    pub rows: usize,
    pub sha256: String,
}

/// Everything needed to repeat a run: the resolved configuration is written
/// next to the manifest and `rerun` names the command.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub experiment: String,
    pub seed: u64,
    pub threads: usize,
    pub wall_time_seconds: f64,
    pub config_file: String,
    pub rerun: String,
    pub outputs: Vec<OutputRecord>,
}

/// Files written by a run, in the order written.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutputs {
    pub dir: PathBuf,
    pub csv: Vec<PathBuf>,
    pub manifest: PathBuf,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt_real(0.0), "0");
        assert_eq!(fmt_real(-0.0), "0");
        assert_eq!(fmt_real(1.0), "1");
        assert_eq!(fmt_real(-2.5), "-2.5");
        assert_eq!(fmt_real(std::f64::consts::PI), "3.14159265359");
        assert_eq!(fmt_real(-1.0748623268620714), "-1.07486232686");
        assert_eq!(fmt_real(123456.789012345), "123456.789012");
        assert_eq!(fmt_real(1e-7), "1e-7");
        assert_eq!(fmt_real(6.02214076e23), "6.02214076e23");
        assert_eq!(fmt_real(0.00012345678901234), "0.000123456789012");
        assert_eq!(fmt_real(f64::NEG_INFINITY), "-inf");
        assert_eq!(fmt_real(f64::NAN), "nan");
        for v in [0.1, 1.0 / 3.0, 98765.4321, 1e-300, -7.5e15] {
            let back: f64 = fmt_real(v).parse().unwrap();
            assert!((back - v).abs() <= 1e-11 * v.abs());
        }
    }

    #[test]
    fn csv_and_gnuplot_layout() {
        let mut t = Table::new("demo", &["name", "x"]);
        t.push(vec!["a,b".into(), r(0.5)]);
        t.push(vec!["k-means".into(), r(-1.0)]);
        let csv = String::from_utf8(t.to_csv().unwrap()).unwrap();
        assert_eq!(csv, "name,x\r\n\"a,b\",0.5\r\nk-means,-1\r\n");
        assert_eq!(t.to_gnuplot(), "# name x\n\"a,b\" 0.5\n\"k-means\" -1\n");
        assert_eq!(t.file_name(), "demo.csv");
    }
}
