//! Plot-ready tables: one row per grid point, written as CSV or JSON.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(&self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format `{other}` (expected csv or json)")),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.extension())
    }
}

/// One table cell. Numbers print in shortest round-trip form, switching to
/// exponent notation outside `[1e-5, 1e16)`; non-finite numbers print as
/// `inf`, `-inf` or `nan` in CSV and as `null` in JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Int(i64),
    Num(f64),
    Text(String),
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Int(v) => write!(f, "{v}"),
            Cell::Num(v) => {
                let a = v.abs();
                if a == 0.0 || !a.is_finite() || (1e-5..1e16).contains(&a) {
                    write!(f, "{v}")
                } else {
                    write!(f, "{v:e}")
                }
            }
            Cell::Text(s) => f.write_str(s),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_owned())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

/// A named table with a fixed header.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(name: &str, columns: impl IntoIterator<Item = S>) -> Self {
        Self {
            name: name.to_owned(),
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    /// Appends a row; its length must match the header.
    pub fn push(&mut self, row: Vec<Cell>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(Error::InvalidParameter {
                name: "row",
                value: row.len() as f64,
                reason: "row length differs from the header",
            });
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Index of a column by name.
    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|c| c.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }

    /// One compact JSON object `{name, columns, rows}` followed by a newline.
    pub fn write_json<W: Write>(&self, mut writer: W) -> Result<()> {
        serde_json::to_writer(&mut writer, self).map_err(std::io::Error::from)?;
        writer.write_all(b"\n")?;
        Ok(())
    }

    pub fn write<W: Write>(&self, format: Format, writer: W) -> Result<()> {
        match format {
            Format::Csv => self.write_csv(writer),
            Format::Json => self.write_json(writer),
        }
    }
}

/// `n` points from `lo` to `hi` inclusive, evenly spaced in `log10`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.log10(), hi.log10());
    let n = n.max(2);
    (0..n)
        .map(|i| 10f64.powf(a + (b - a) * i as f64 / (n - 1) as f64))
        .collect()
}

/// `n` points from `lo` to `hi` inclusive, evenly spaced.
pub fn linear_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let n = n.max(2);
    (0..n)
        .map(|i| if i + 1 == n { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Table {
        let mut t = Table::new("demo", ["name", "k", "value"]);
        t.push(vec!["a".into(), 3usize.into(), 0.1.into()]).unwrap();
        t.push(vec!["b".into(), 4usize.into(), f64::INFINITY.into()]).unwrap();
        t
    }

    #[test]
    fn csv_has_header_and_rows() {
        let mut buf = Vec::new();
        sample().write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "name,k,value\na,3,0.1\nb,4,inf\n");
    }

    #[test]
    fn json_is_one_line_per_table() {
        let mut buf = Vec::new();
        sample().write(Format::Json, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1);
        assert!(text.starts_with(r#"{"name":"demo","columns":["name","k","value"],"rows":[["a",3,0.1],"#));
        assert!(text.contains("null"));
    }

    #[test]
    fn small_and_large_numbers_use_exponents() {
        assert_eq!(Cell::Num(4.5e-240).to_string(), "4.5e-240");
        assert_eq!(Cell::Num(-2e20).to_string(), "-2e20");
        assert_eq!(Cell::Num(0.00125).to_string(), "0.00125");
        assert_eq!(Cell::Num(0.0).to_string(), "0");
        assert_eq!(Cell::Num(1428857.1428571427).to_string(), "1428857.1428571427");
        let back: f64 = Cell::Num(4.710928105945921e-240).to_string().parse().unwrap();
        assert_eq!(back, 4.710928105945921e-240);
    }

    #[test]
    fn ragged_rows_are_rejected() {
        let mut t = Table::new("demo", ["a", "b"]);
        assert!(t.push(vec![1.0.into()]).is_err());
        assert!(t.is_empty());
    }

    #[test]
    fn grids_hit_both_ends() {
        let g = log_grid(0.01, 10.0, 61);
        assert_eq!(g[40], 1.0);
        assert!((g[0] - 0.01).abs() < 1e-15);
        assert!((g[60] - 10.0).abs() < 1e-12);
        let l = linear_grid(0.0, 1.0, 11);
        assert_eq!(l[10], 1.0);
        assert_eq!(l[5], 0.5);
    }

    #[test]
    fn format_parses_case_insensitively() {
        assert_eq!("JSON".parse::<Format>().unwrap(), Format::Json);
        assert!("xml".parse::<Format>().is_err());
    }
}
