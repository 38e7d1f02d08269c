//! File ingestion and serialization.
//!
//! Row numbers in ingestion errors are 1-based data rows (the header of a
//! dataset CSV is not counted).

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::{CostMatrix, LabelAssignment, LabeledDataset, ScoreMatrix};
use crate::error::{Error, Result};

/// Column layout of a dataset CSV.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSchema {
    pub label_column: String,
}

impl DatasetSchema {
    pub fn new(label_column: impl Into<String>) -> Self {
        Self {
            label_column: label_column.into(),
        }
    }
}

const MISSING_MARKERS: &[&str] = &["", "?", "NA", "na", "N/A", "null", "NaN", "nan"];

fn is_missing(cell: &str) -> bool {
    MISSING_MARKERS.contains(&cell.trim())
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::io(path, e))
}

/// Reads a headered CSV with one label column and numeric feature columns.
/// Labels are re-encoded densely in first-appearance order.
pub fn load_dataset(path: impl AsRef<Path>, schema: &DatasetSchema) -> Result<LabeledDataset> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(open(path)?);
    let headers = reader
        .headers()
        .map_err(|e| Error::ingest(path, format!("unreadable header: {e}")))?
        .clone();
    let label_idx = headers
        .iter()
        .position(|h| h == schema.label_column)
        .ok_or_else(|| {
            Error::ingest(
                path,
                format!("label column '{}' not found in header", schema.label_column),
            )
        })?;
    let width = headers.len();

    let mut names: Vec<String> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut features = Vec::new();
    let mut labels = Vec::new();
    for (k, record) in reader.records().enumerate() {
        let row = k + 1;
        let record = record.map_err(|e| Error::ingest(path, format!("row {row}: {e}")))?;
        if record.len() != width {
            return Err(Error::ingest(
                path,
                format!("row {row} has {} fields, header has {width}", record.len()),
            ));
        }
        let raw_label = &record[label_idx];
        if is_missing(raw_label) {
            return Err(Error::ingest(path, format!("row {row} has no label")));
        }
        let next = names.len();
        let label = *index.entry(raw_label.to_string()).or_insert_with(|| {
            names.push(raw_label.to_string());
            next
        });
        let mut x = Vec::with_capacity(width - 1);
        for (col, cell) in record.iter().enumerate() {
            if col == label_idx {
                continue;
            }
            if is_missing(cell) {
                return Err(Error::ingest(
                    path,
                    format!("row {row}, column '{}': missing value", &headers[col]),
                ));
            }
            let v: f64 = cell.parse().map_err(|_| {
                Error::ingest(
                    path,
                    format!("row {row}, column '{}': '{cell}' is not numeric", &headers[col]),
                )
            })?;
            if !v.is_finite() {
                return Err(Error::ingest(
                    path,
                    format!("row {row}, column '{}': non-finite value", &headers[col]),
                ));
            }
            x.push(v);
        }
        features.push(x);
        labels.push(label);
    }
    if names.len() < 2 {
        return Err(Error::ingest(
            path,
            format!("found {} distinct class(es), need at least 2", names.len()),
        ));
    }
    let c = names.len();
    LabeledDataset::new(features, labels, c, names).map_err(|e| Error::ingest(path, e.to_string()))
}

fn headerless_reader(path: &Path) -> Result<csv::Reader<File>> {
    Ok(csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(open(path)?))
}

/// Reads a headerless CSV of n rows by c decimal columns.
pub fn load_score_matrix(path: impl AsRef<Path>) -> Result<ScoreMatrix> {
    let path = path.as_ref();
    let mut reader = headerless_reader(path)?;
    let mut data = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for (k, record) in reader.records().enumerate() {
        let row = k + 1;
        let record = record.map_err(|e| Error::ingest(path, format!("row {row}: {e}")))?;
        let expected = *cols.get_or_insert(record.len());
        if record.len() != expected {
            return Err(Error::ingest(
                path,
                format!(
                    "row {row} has {} columns, expected {expected}",
                    record.len()
                ),
            ));
        }
        for (j, cell) in record.iter().enumerate() {
            let col = j + 1;
            let v: f64 = cell.parse().map_err(|_| {
                Error::ingest(path, format!("row {row}, column {col}: '{cell}' is not numeric"))
            })?;
            if !v.is_finite() {
                return Err(Error::ingest(
                    path,
                    format!("row {row}, column {col}: '{cell}' is not finite"),
                ));
            }
            data.push(v);
        }
        rows += 1;
    }
    let cols = cols.ok_or_else(|| Error::ingest(path, "empty score matrix"))?;
    ScoreMatrix::from_row_major(data, rows, cols).map_err(|e| Error::ingest(path, e.to_string()))
}

/// Writes scores using shortest round-trip decimal formatting.
pub fn write_score_matrix(path: impl AsRef<Path>, scores: &ScoreMatrix) -> Result<()> {
    let path = path.as_ref();
    let mut out = create(path)?;
    for row in scores.rows() {
        let line: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
        writeln!(out, "{}", line.join(",")).map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

/// Reads one non-negative integer class index per line.
pub fn load_labels(path: impl AsRef<Path>) -> Result<Vec<usize>> {
    let path = path.as_ref();
    let mut reader = headerless_reader(path)?;
    let mut labels = Vec::new();
    for (k, record) in reader.records().enumerate() {
        let row = k + 1;
        let record = record.map_err(|e| Error::ingest(path, format!("row {row}: {e}")))?;
        if record.len() != 1 {
            return Err(Error::ingest(
                path,
                format!("row {row} has {} fields, expected 1", record.len()),
            ));
        }
        let label = record[0].parse().map_err(|_| {
            Error::ingest(
                path,
                format!("row {row}: '{}' is not a class index", &record[0]),
            )
        })?;
        labels.push(label);
    }
    Ok(labels)
}

pub fn write_labels(path: impl AsRef<Path>, labels: &LabelAssignment) -> Result<()> {
    let path = path.as_ref();
    let mut out = create(path)?;
    for p in labels.predictions() {
        writeln!(out, "{p}").map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

pub fn load_cost_matrix(path: impl AsRef<Path>) -> Result<CostMatrix> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::ingest(path, e.to_string()))
}

pub fn write_json<T: Serialize + ?Sized>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let path = path.as_ref();
    let mut out = create(path)?;
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out).map_err(|e| Error::io(path, e))?;
    out.flush().map_err(|e| Error::io(path, e))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: impl AsRef<Path>) -> Result<T> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::ingest(path, e.to_string()))
}

pub(crate) fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}
