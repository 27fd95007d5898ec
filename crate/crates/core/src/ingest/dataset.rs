use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CsvOptions {
    pub delimiter: u8,
    pub header: bool,
    pub decimal_separator: char,
}

impl Default for CsvOptions {
    fn default() -> Self {
        CsvOptions {
            delimiter: b',',
            header: true,
            decimal_separator: '.',
        }
    }
}

/// One numeric feature. Missing cells are stored as NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct Column<T> {
    pub label: String,
    pub values: Vec<T>,
}

impl<T: Scalar> Column<T> {
    pub fn present(&self) -> impl Iterator<Item = T> + '_ {
        self.values.iter().copied().filter(|v| !v.is_nan())
    }
}

/// A numeric table whose columns are the dataset's features.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetMatrix<T> {
    pub name: String,
    pub columns: Vec<Column<T>>,
    pub n_rows: usize,
    /// Labels of non-numeric columns that were dropped on load.
    pub dropped: Vec<String>,
}

impl<T: Scalar> DatasetMatrix<T> {
    pub fn new(name: impl Into<String>, columns: Vec<Column<T>>) -> Result<Self> {
        let n_rows = columns.first().map_or(0, |c| c.values.len());
        if columns.iter().any(|c| c.values.len() != n_rows) {
            return Err(Error::DegenerateInput("columns differ in length".into()));
        }
        Ok(DatasetMatrix {
            name: name.into(),
            columns,
            n_rows,
            dropped: Vec::new(),
        })
    }

    pub fn n_features(&self) -> usize {
        self.columns.len()
    }

    /// Writes the numeric matrix as CSV with a header row; missing cells
    /// become empty fields.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(self.columns.iter().map(|c| c.label.as_str()))
            .map_err(csv_io)?;
        for row in 0..self.n_rows {
            let record: Vec<String> = self
                .columns
                .iter()
                .map(|c| {
                    let v = c.values[row];
                    if v.is_nan() {
                        String::new()
                    } else {
                        format!("{v:e}")
                    }
                })
                .collect();
            w.write_record(&record).map_err(csv_io)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn csv_io(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

fn malformed(e: &csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    Error::MalformedCsv {
        line,
        reason: e.to_string(),
    }
}

fn parse_cell<T: Scalar>(cell: &str, decimal: char) -> Option<Option<T>> {
    let cell = cell.trim();
    if cell.is_empty() || cell.eq_ignore_ascii_case("na") || cell.eq_ignore_ascii_case("nan") {
        return Some(None);
    }
    let normalized;
    let text = if decimal == '.' {
        cell
    } else {
        normalized = cell.replace(decimal, ".");
        &normalized
    };
    let v: f64 = text.parse().ok()?;
    if !v.is_finite() {
        return None;
    }
    Some(Some(T::of(v)))
}

pub fn load_csv<T: Scalar>(path: &Path, options: &CsvOptions) -> Result<DatasetMatrix<T>> {
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string());
    read_csv(name, File::open(path)?, options)
}

/// Parses a dataset, keeping the columns whose every non-missing cell is a
/// finite number.
pub fn read_csv<T: Scalar, R: Read>(
    name: impl Into<String>,
    input: R,
    options: &CsvOptions,
) -> Result<DatasetMatrix<T>> {
    if char::from(options.delimiter) == options.decimal_separator {
        return Err(Error::InvalidConfig(
            "delimiter and decimal separator must differ".into(),
        ));
    }
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(options.delimiter)
        .has_headers(options.header)
        .flexible(false)
        .from_reader(input);

    let mut labels: Vec<String> = if options.header {
        reader
            .headers()
            .map_err(|e| malformed(&e))?
            .iter()
            .map(|h| h.trim().to_string())
            .collect()
    } else {
        Vec::new()
    };

    let mut cells: Vec<Vec<Option<T>>> = Vec::new();
    let mut numeric: Vec<bool> = vec![true; labels.len()];
    let mut rows = 0usize;
    for record in reader.records() {
        let record = record.map_err(|e| malformed(&e))?;
        if rows == 0 && labels.is_empty() {
            labels = (1..=record.len()).map(|i| format!("column_{i}")).collect();
            numeric = vec![true; labels.len()];
        }
        if record.len() != labels.len() {
            let line = record.position().map_or(0, |p| p.line());
            return Err(Error::MalformedCsv {
                line,
                reason: format!("expected {} fields, found {}", labels.len(), record.len()),
            });
        }
        if cells.is_empty() {
            cells = vec![Vec::new(); labels.len()];
        }
        for (j, field) in record.iter().enumerate() {
            match parse_cell::<T>(field, options.decimal_separator) {
                Some(v) => cells[j].push(v),
                None => {
                    numeric[j] = false;
                    cells[j].push(None);
                }
            }
        }
        rows += 1;
    }

    if labels.is_empty() || (rows == 0 && !options.header) {
        return Err(Error::MalformedCsv {
            line: 1,
            reason: "no data".into(),
        });
    }
    if rows == 0 {
        return Err(Error::NoNumericColumns);
    }

    let mut columns = Vec::new();
    let mut dropped = Vec::new();
    for (j, label) in labels.into_iter().enumerate() {
        let present = cells[j].iter().filter(|v| v.is_some()).count();
        if numeric[j] && present >= 2 {
            let values = cells[j].iter().map(|v| v.unwrap_or_else(T::nan)).collect();
            columns.push(Column { label, values });
        } else {
            warn!("dropping non-numeric column {label:?}");
            dropped.push(label);
        }
    }
    if columns.is_empty() {
        return Err(Error::NoNumericColumns);
    }
    Ok(DatasetMatrix {
        name: name.into(),
        columns,
        n_rows: rows,
        dropped,
    })
}
