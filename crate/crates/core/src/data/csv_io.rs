use std::collections::BTreeSet;
use std::fs::File;
use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;

use super::Dataset;
use crate::error::{GeuError, Result};

/// A CSV column, by header name or zero-based position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ColumnRef {
    Name(String),
    Index(usize),
}

impl std::fmt::Display for ColumnRef {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ColumnRef::Name(n) => write!(f, "{n:?}"),
            ColumnRef::Index(i) => write!(f, "#{i}"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct LoadOptions {
    pub label_column: ColumnRef,
    pub delimiter: u8,
    pub has_header: bool,
    /// Non-feature columns to discard (ids and the like).
    pub drop_columns: Vec<ColumnRef>,
}

impl Default for LoadOptions {
    fn default() -> Self {
        Self {
            label_column: ColumnRef::Name("label".to_string()),
            delimiter: b',',
            has_header: true,
            drop_columns: Vec::new(),
        }
    }
}

fn resolve(col: &ColumnRef, header: Option<&[String]>, width: usize) -> Option<usize> {
    match col {
        ColumnRef::Index(i) => (*i < width).then_some(*i),
        ColumnRef::Name(name) => header?.iter().position(|h| h == name),
    }
}

/// Load a labeled feature table. Labels are remapped to `0..C` in sorted order
/// (numeric order when every label parses as an integer).
pub fn load_csv(path: impl AsRef<Path>, options: &LoadOptions) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| GeuError::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .delimiter(options.delimiter)
        .flexible(true)
        .from_reader(file);

    let mut header: Option<Vec<String>> = None;
    let mut rows: Vec<(usize, csv::StringRecord)> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| GeuError::ParseError {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if options.has_header && header.is_none() {
            header = Some(record.iter().map(|s| s.trim().to_string()).collect());
            continue;
        }
        if record.len() == 1 && record[0].trim().is_empty() {
            continue;
        }
        rows.push((line, record));
    }
    let width = header
        .as_ref()
        .map(|h| h.len())
        .or_else(|| rows.first().map(|(_, r)| r.len()))
        .unwrap_or(0);
    if rows.len() < 2 {
        return Err(GeuError::TooFewSamples { needed: 2, got: rows.len() });
    }

    let label_idx = resolve(&options.label_column, header.as_deref(), width)
        .ok_or_else(|| GeuError::MissingLabelColumn(options.label_column.to_string()))?;
    let mut dropped = BTreeSet::new();
    for col in &options.drop_columns {
        let idx = resolve(col, header.as_deref(), width)
            .ok_or_else(|| GeuError::InvalidParameter(format!("drop column {col} not found")))?;
        dropped.insert(idx);
    }
    let feature_cols: Vec<usize> = (0..width).filter(|c| *c != label_idx && !dropped.contains(c)).collect();
    let column_name = |c: usize| -> String {
        header.as_ref().map_or_else(|| c.to_string(), |h| h[c].clone())
    };

    let mut values = Vec::with_capacity(rows.len() * feature_cols.len());
    let mut raw_labels = Vec::with_capacity(rows.len());
    for (line, record) in &rows {
        if record.len() != width {
            return Err(GeuError::ParseError {
                line: *line,
                message: format!("expected {width} fields, found {}", record.len()),
            });
        }
        for &c in &feature_cols {
            let cell = record[c].trim();
            if cell.is_empty() {
                return Err(GeuError::ParseError {
                    line: *line,
                    message: format!("missing value in column {}", column_name(c)),
                });
            }
            let v: f64 = cell
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| GeuError::NonNumericFeature { line: *line, column: column_name(c) })?;
            values.push(v);
        }
        let label = record[label_idx].trim();
        if label.is_empty() {
            return Err(GeuError::ParseError { line: *line, message: "missing label".to_string() });
        }
        raw_labels.push(label.to_string());
    }

    let mut classes: Vec<String> = raw_labels.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
    if classes.iter().all(|c| c.parse::<i64>().is_ok()) {
        classes.sort_by_key(|c| c.parse::<i64>().unwrap_or_default());
    }
    let labels = raw_labels
        .iter()
        .map(|l| classes.iter().position(|c| c == l).unwrap_or_default())
        .collect();

    let features = DMatrix::from_row_slice(rows.len(), feature_cols.len(), &values);
    let names = feature_cols.iter().map(|&c| column_name(c)).collect();
    Dataset::new(features, labels)?.with_feature_names(names)?.with_class_names(classes)
}

/// Write a dataset as `features..., label` with a header row. Reading the
/// file back with label column `label` reproduces the dataset exactly.
pub fn write_csv(ds: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let io = |e| GeuError::io(path, e);
    let mut out = std::io::BufWriter::new(File::create(path).map_err(io)?);
    let mut header: Vec<String> = match ds.feature_names() {
        Some(names) => names.to_vec(),
        None => (0..ds.n_features()).map(|j| format!("f{j}")).collect(),
    };
    header.push("label".to_string());
    writeln!(out, "{}", header.join(",")).map_err(io)?;
    for i in 0..ds.n_samples() {
        let mut cells: Vec<String> = ds.features().row(i).iter().map(|v| format!("{v:?}")).collect();
        let label = ds.labels()[i];
        cells.push(ds.class_names().map_or_else(|| label.to_string(), |n| n[label].clone()));
        writeln!(out, "{}", cells.join(",")).map_err(io)?;
    }
    out.flush().map_err(io)
}
