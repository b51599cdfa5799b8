//! Measured detector drift series.

use std::path::{Path, PathBuf};

use qkd_lsm_core::DriftRange;

use crate::error::FixtureError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DriftKind {
    Dcr,
    Efficiency,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Temperature {
    Room,
    Low,
}

impl DriftKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Dcr => "dcr",
            Self::Efficiency => "efficiency",
        }
    }
}

impl Temperature {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Room => "room",
            Self::Low => "low",
        }
    }
}

/// Time series of a detector parameter, `t_min` in minutes.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftFixture {
    pub path: PathBuf,
    pub timestamps: Vec<f64>,
    pub values: Vec<f64>,
    pub kind: DriftKind,
    pub temperature: Temperature,
}

impl DriftFixture {
    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Relative span `[min/nominal - 1, max/nominal - 1]`, widened to contain 0.
    pub fn relative_range(&self, nominal: f64) -> Result<(f64, f64), FixtureError> {
        DriftRange::relative_span(self.min(), self.max(), nominal).map_err(|e| {
            FixtureError::Invalid {
                path: self.path.clone(),
                reason: e.to_string(),
            }
        })
    }
}

pub fn read_fixture(
    path: &Path,
    kind: DriftKind,
    temperature: Temperature,
) -> Result<DriftFixture, FixtureError> {
    let invalid = |reason: String| FixtureError::Invalid {
        path: path.to_path_buf(),
        reason,
    };
    let file = std::fs::File::open(path).map_err(|source| FixtureError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(file);
    let header = rdr.headers().map_err(|e| invalid(e.to_string()))?.clone();
    if header.iter().collect::<Vec<_>>() != ["t_min", "value"] {
        return Err(invalid(format!(
            "expected header `t_min,value`, got `{}`",
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }

    let mut timestamps = Vec::new();
    let mut values = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| invalid(e.to_string()))?;
        let row = i + 2;
        let num = |field: usize| -> Result<f64, FixtureError> {
            rec.get(field)
                .and_then(|s| s.parse::<f64>().ok())
                .filter(|x| x.is_finite())
                .ok_or_else(|| {
                    invalid(format!(
                        "line {row}: cannot parse {:?}",
                        rec.get(field).unwrap_or("")
                    ))
                })
        };
        let (t, v) = (num(0)?, num(1)?);
        if let Some(&prev) = timestamps.last() {
            if t <= prev {
                return Err(invalid(format!(
                    "line {row}: timestamp {t} does not increase"
                )));
            }
        }
        if v <= 0.0 {
            return Err(invalid(format!("line {row}: value {v} is not positive")));
        }
        timestamps.push(t);
        values.push(v);
    }
    if values.len() < 2 {
        return Err(invalid(format!(
            "need at least 2 samples, found {}",
            values.len()
        )));
    }
    Ok(DriftFixture {
        path: path.to_path_buf(),
        timestamps,
        values,
        kind,
        temperature,
    })
}

/// Reads a fixture and its relative drift range around `nominal`.
pub fn ingest_fixture(
    path: &Path,
    kind: DriftKind,
    temperature: Temperature,
    nominal: f64,
) -> Result<(DriftFixture, (f64, f64)), FixtureError> {
    let fixture = read_fixture(path, kind, temperature)?;
    let range = fixture.relative_range(nominal)?;
    Ok((fixture, range))
}
