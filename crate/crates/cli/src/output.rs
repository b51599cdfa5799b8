//! Result tables and their CSV/JSON encodings.
//!
//! Floats are written in scientific notation with 9 significant digits, so
//! identical tables always produce identical bytes.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::error::OutputError;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Csv => "csv",
            Self::Json => "json",
        }
    }
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(format!("unknown format {other:?} (expected csv or json)")),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(u64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Self::Float(x) => format_float(*x),
            Self::Int(n) => n.to_string(),
            Self::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> serde_json::Value {
        match self {
            // route through the fixed-precision text so both formats agree
            Self::Float(x) => format_float(*x)
                .parse::<f64>()
                .ok()
                .and_then(serde_json::Number::from_f64)
                .map_or(serde_json::Value::Null, serde_json::Value::Number),
            Self::Int(n) => serde_json::Value::from(*n),
            Self::Text(s) => serde_json::Value::from(s.as_str()),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Self::Float(x) => Some(*x),
            Self::Int(n) => Some(*n as f64),
            Self::Text(_) => None,
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Self::Float(x)
    }
}

impl From<u64> for Cell {
    fn from(n: u64) -> Self {
        Self::Int(n)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Self::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Self::Text(s)
    }
}

pub fn format_float(x: f64) -> String {
    format!("{x:.8e}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(
            row.len(),
            self.columns.len(),
            "row width does not match header"
        );
        self.rows.push(row);
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Numeric values of one column.
    pub fn column_f64(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.column_index(name)?;
        self.rows.iter().map(|r| r[i].as_f64()).collect()
    }

    pub fn to_csv(&self) -> Result<String, OutputError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| OutputError::Csv(e.into_error().into()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|r| serde_json::Value::Array(r.iter().map(Cell::json).collect()))
            .collect();
        let doc = serde_json::json!({ "columns": self.columns, "rows": rows });
        let mut text = serde_json::to_string_pretty(&doc).expect("json values always serialize");
        text.push('\n');
        text
    }

    pub fn render(&self, format: Format) -> Result<String, OutputError> {
        if self.is_empty() {
            return Err(OutputError::EmptyTable);
        }
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => Ok(self.to_json()),
        }
    }
}

/// Writes `table` to `path`. Nothing is created when the table is empty.
pub fn emit_results(table: &Table, format: Format, path: &Path) -> Result<(), OutputError> {
    let text = table.render(format)?;
    std::fs::write(path, text).map_err(|source| OutputError::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Table {
        let mut t = Table::new(&["distance_km", "rate", "reason"]);
        t.push(vec![0.0.into(), 1.234567891234e-3.into(), "ok".into()]);
        t.push(vec![12.5.into(), 0.0.into(), "zero_rate".into()]);
        t.push(vec![Cell::Int(7), (-2.0f64 / 3.0).into(), "a,b".into()]);
        t
    }

    #[test]
    fn empty_table_creates_no_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        let t = Table::new(&["x"]);
        assert!(matches!(
            emit_results(&t, Format::Csv, &path),
            Err(OutputError::EmptyTable)
        ));
        assert!(!path.exists());
    }

    #[test]
    fn identical_bytes() {
        let dir = tempfile::tempdir().unwrap();
        for format in [Format::Csv, Format::Json] {
            let a = dir.path().join("a");
            let b = dir.path().join("b");
            emit_results(&sample(), format, &a).unwrap();
            emit_results(&sample(), format, &b).unwrap();
            assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
        }
    }

    #[test]
    fn csv_round_trip() {
        let t = sample();
        let text = t.to_csv().unwrap();
        assert!(text.starts_with("distance_km,rate,reason\n"));
        let mut rdr = csv::Reader::from_reader(text.as_bytes());
        let records: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
        assert_eq!(records.len(), t.rows.len());
        for (rec, row) in records.iter().zip(&t.rows) {
            for (field, cell) in rec.iter().zip(row) {
                match cell {
                    Cell::Float(x) => {
                        let y: f64 = field.parse().unwrap();
                        assert!((x - y).abs() <= 5e-9 * x.abs());
                    }
                    Cell::Int(n) => assert_eq!(field.parse::<u64>().unwrap(), *n),
                    Cell::Text(s) => assert_eq!(field, s),
                }
            }
        }
    }

    #[test]
    fn nine_significant_digits() {
        assert_eq!(format_float(1.234567891234e-3), "1.23456789e-3");
        assert_eq!(format_float(0.0), "0.00000000e0");
        assert_eq!(format_float(130.25), "1.30250000e2");
    }

    #[test]
    fn json_shape() {
        let v: serde_json::Value = serde_json::from_str(&sample().to_json()).unwrap();
        assert_eq!(v["columns"][1], "rate");
        assert_eq!(v["rows"].as_array().unwrap().len(), 3);
        assert_eq!(v["rows"][0][1].as_f64().unwrap(), 1.23456789e-3);
        assert_eq!(v["rows"][2][0], 7);
    }

    #[test]
    fn write_error_has_path() {
        let err = emit_results(
            &sample(),
            Format::Csv,
            Path::new("/nonexistent/dir/out.csv"),
        )
        .unwrap_err();
        assert!(err.to_string().contains("/nonexistent/dir/out.csv"));
    }

    #[test]
    fn format_parse() {
        assert_eq!("csv".parse::<Format>().unwrap(), Format::Csv);
        assert_eq!("json".parse::<Format>().unwrap(), Format::Json);
        assert!("xml".parse::<Format>().is_err());
    }
}
