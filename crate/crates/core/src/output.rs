//! Tidy tables written as CSV or JSON, plus the run manifest sidecar.

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};

pub const SIGNIFICANT_DIGITS: usize = 9;

/// Formats `x` with nine significant digits. Plain decimal for moderate
/// magnitudes, exponent notation otherwise. Re-formatting the parsed output
/// gives the same string.
pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let rounded: f64 = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x).parse().expect("formatted float parses");
    if rounded == 0.0 {
        return "0".into();
    }
    let mag = rounded.abs();
    if (1e-4..1e9).contains(&mag) {
        format!("{rounded}")
    } else {
        format!("{rounded:e}")
    }
}

/// Value `x` takes after a trip through [`format_number`].
pub fn round_significant(x: f64) -> f64 {
    if !x.is_finite() {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x).parse().expect("formatted float parses")
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Empty,
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Num(x) => f.write_str(&format_number(*x)),
            Cell::Int(i) => write!(f, "{i}"),
            Cell::Text(s) => f.write_str(s),
            Cell::Empty => Ok(()),
        }
    }
}

impl Cell {
    fn to_json(&self) -> Value {
        match self {
            Cell::Num(x) => {
                let r = round_significant(*x);
                serde_json::Number::from_f64(r).map(Value::Number).unwrap_or_else(|| Value::String(format_number(*x)))
            }
            Cell::Int(i) => Value::from(*i),
            Cell::Text(s) => Value::String(s.clone()),
            Cell::Empty => Value::Null,
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::Num)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width does not match header");
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|c| c.to_string()))?;
        }
        w.into_inner().map_err(|e| Error::Io(e.to_string()))
    }

    /// An array of objects, one per row; empty cells become `null`.
    pub fn to_json_value(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|row| {
                    let obj: Map<String, Value> =
                        self.columns.iter().cloned().zip(row.iter().map(Cell::to_json)).collect();
                    Value::Object(obj)
                })
                .collect(),
        )
    }

    pub fn render(&self, format: Format) -> Result<Vec<u8>> {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => {
                let mut out = serde_json::to_vec_pretty(&self.to_json_value())?;
                out.push(b'\n');
                Ok(out)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::usage(format!("unknown format '{other}', expected csv or json"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub params: Value,
    pub seed: Option<u64>,
    pub version: String,
    pub timestamp: String,
}

impl RunManifest {
    pub fn new(command: &str, params: Value, seed: Option<u64>) -> Self {
        RunManifest {
            command: command.to_string(),
            params,
            seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        }
    }
}

/// `<out>.manifest.json`.
pub fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".manifest.json");
    out.with_file_name(name)
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<tempfile::NamedTempFile> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.flush()?;
    Ok(tmp)
}

/// Writes the table and its manifest. Both are staged in temporary files and
/// only moved into place once both are complete.
pub fn write_output(path: &Path, table: &Table, format: Format, manifest: &RunManifest) -> Result<()> {
    let data = table.render(format)?;
    let mut meta = serde_json::to_vec_pretty(manifest)?;
    meta.push(b'\n');
    let data_tmp = write_atomic(path, &data)?;
    let meta_path = manifest_path(path);
    let meta_tmp = write_atomic(&meta_path, &meta)?;
    data_tmp.persist(path).map_err(|e| Error::Io(e.to_string()))?;
    meta_tmp.persist(&meta_path).map_err(|e| Error::Io(e.to_string()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_digits() {
        assert_eq!(format_number(0.355_711_371_844_481_5), "0.355711372");
        assert_eq!(format_number(4.8e-6), "4.8e-6");
        assert_eq!(format_number(1.0), "1");
        assert_eq!(format_number(-123_456_789_012.0), "-1.23456789e11");
        assert_eq!(format_number(0.0), "0");
        assert_eq!(format_number(-0.0), "0");
        assert_eq!(format_number(f64::NAN), "nan");
    }

    #[test]
    fn formatting_is_idempotent() {
        for x in [1.0 / 3.0, 2.0f64.sqrt() * 1e-7, 987_654_321.987, 1e-4, 9.999_999_999_9e-5, 12.5] {
            let once = format_number(x);
            let twice = format_number(once.parse().unwrap());
            assert_eq!(once, twice, "{x}");
        }
    }

    #[test]
    fn csv_and_json_carry_same_values() {
        let mut t = Table::new(&["name", "x", "k"]);
        t.push(vec!["a".into(), Cell::Num(1.0 / 3.0), Cell::Int(2)]);
        t.push(vec!["b".into(), Cell::Empty, Cell::Empty]);
        let csv = String::from_utf8(t.to_csv().unwrap()).unwrap();
        assert_eq!(csv, "name,x,k\na,0.333333333,2\nb,,\n");
        let json = t.to_json_value();
        assert_eq!(json[0]["x"].as_f64().unwrap(), 0.333_333_333);
        assert!(json[1]["x"].is_null());
    }

    #[test]
    fn manifest_sits_next_to_output() {
        assert_eq!(manifest_path(Path::new("/a/b/run.csv")), PathBuf::from("/a/b/run.csv.manifest.json"));
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("t.csv");
        let t = Table::new(&["x"]);
        write_output(&out, &t, Format::Csv, &RunManifest::new("test", Value::Null, None)).unwrap();
        assert!(out.exists());
        assert!(manifest_path(&out).exists());
    }
}
