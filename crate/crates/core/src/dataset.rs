//! Sparse entity × feature matrices with explicitly missing cells.
//!
//! Rows are entities (brands), columns are features (topics). A cell is either
//! an observed finite value or missing; missing is never encoded as NaN.

use std::collections::{BTreeSet, HashSet};
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Result, SparsimError};

/// One matrix entry: an observed finite value, or missing.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Cell(Option<f64>);

impl Cell {
    pub const MISSING: Cell = Cell(None);

    /// Observed value. Panics on NaN or infinity; use [`Cell::try_observed`]
    /// for untrusted input.
    pub fn observed(value: f64) -> Cell {
        Self::try_observed(value).expect("cell values must be finite")
    }

    pub fn try_observed(value: f64) -> Option<Cell> {
        value.is_finite().then_some(Cell(Some(value)))
    }

    pub fn missing() -> Cell {
        Cell(None)
    }

    pub fn from_option(value: Option<f64>) -> Cell {
        match value {
            Some(v) => Cell::observed(v),
            None => Cell::MISSING,
        }
    }

    #[inline]
    pub fn value(self) -> Option<f64> {
        self.0
    }

    #[inline]
    pub fn is_missing(self) -> bool {
        self.0.is_none()
    }
}

/// Field texts treated as missing when reading CSV.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MissingTokens(BTreeSet<String>);

impl Default for MissingTokens {
    fn default() -> Self {
        MissingTokens(
            ["", "NA", "NaN", "nan"]
                .into_iter()
                .map(String::from)
                .collect(),
        )
    }
}

impl MissingTokens {
    pub fn new<I, S>(tokens: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        MissingTokens(tokens.into_iter().map(Into::into).collect())
    }

    pub fn contains(&self, text: &str) -> bool {
        self.0.contains(text)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    row_labels: Vec<String>,
    col_labels: Vec<String>,
    cells: Vec<Cell>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub n_rows: usize,
    pub n_cols: usize,
    pub missing_fraction: f64,
    pub row_missing_counts: Vec<usize>,
}

fn check_unique(labels: &[String], what: &str) -> Result<()> {
    let mut seen = HashSet::with_capacity(labels.len());
    for label in labels {
        if !seen.insert(label.as_str()) {
            return Err(SparsimError::Validation(format!(
                "duplicate {what} label {label:?}"
            )));
        }
    }
    Ok(())
}

impl SparseMatrix {
    pub fn new(
        row_labels: Vec<String>,
        col_labels: Vec<String>,
        rows: Vec<Vec<Cell>>,
    ) -> Result<Self> {
        if row_labels.is_empty() || col_labels.is_empty() {
            return Err(SparsimError::Validation(
                "matrix needs at least one row and one column".into(),
            ));
        }
        if rows.len() != row_labels.len() {
            return Err(SparsimError::Validation(format!(
                "{} row labels but {} rows",
                row_labels.len(),
                rows.len()
            )));
        }
        check_unique(&row_labels, "row")?;
        check_unique(&col_labels, "column")?;
        let n_cols = col_labels.len();
        let mut cells = Vec::with_capacity(rows.len() * n_cols);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != n_cols {
                return Err(SparsimError::Parse {
                    row: i + 1,
                    message: format!("expected {} cells, found {}", n_cols, row.len()),
                });
            }
            cells.extend(row);
        }
        Ok(SparseMatrix {
            row_labels,
            col_labels,
            cells,
        })
    }

    /// Builds a matrix with generated labels `r0..`, `c0..`.
    pub fn from_rows(rows: Vec<Vec<Cell>>) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        Self::new(
            (0..n_rows).map(|i| format!("r{i}")).collect(),
            (0..n_cols).map(|j| format!("c{j}")).collect(),
            rows,
        )
    }

    pub fn n_rows(&self) -> usize {
        self.row_labels.len()
    }

    pub fn n_cols(&self) -> usize {
        self.col_labels.len()
    }

    pub fn row_labels(&self) -> &[String] {
        &self.row_labels
    }

    pub fn col_labels(&self) -> &[String] {
        &self.col_labels
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Cell {
        self.cells[row * self.n_cols() + col]
    }

    pub fn row(&self, row: usize) -> &[Cell] {
        let n = self.n_cols();
        &self.cells[row * n..(row + 1) * n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Cell]> {
        self.cells.chunks(self.n_cols())
    }

    /// Observed values of a column, in row order.
    pub fn observed_in_column(&self, col: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        (0..self.n_rows()).filter_map(move |i| self.get(i, col).value().map(|v| (i, v)))
    }

    pub fn stats(&self) -> DatasetStats {
        let row_missing_counts: Vec<usize> = self
            .rows()
            .map(|r| r.iter().filter(|c| c.is_missing()).count())
            .collect();
        let total: usize = row_missing_counts.iter().sum();
        DatasetStats {
            n_rows: self.n_rows(),
            n_cols: self.n_cols(),
            missing_fraction: total as f64 / (self.n_rows() * self.n_cols()) as f64,
            row_missing_counts,
        }
    }

    pub fn load_csv(path: impl AsRef<Path>, missing: &MissingTokens) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| SparsimError::io(path, e))?;
        Self::from_reader(file, missing)
    }

    /// Reads CSV: header row of feature names, first column of entity names.
    pub fn from_reader<R: Read>(reader: R, missing: &MissingTokens) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(true)
            .from_reader(reader);
        let header = rdr.headers()?.clone();
        if header.len() < 2 {
            return Err(SparsimError::Validation(
                "header must contain an id column and at least one feature".into(),
            ));
        }
        let col_labels: Vec<String> = header
            .iter()
            .skip(1)
            .map(|s| s.trim().to_string())
            .collect();
        let mut row_labels = Vec::new();
        let mut rows = Vec::new();
        for (idx, record) in rdr.records().enumerate() {
            let record = record?;
            let row_no = idx + 1;
            if record.len() != header.len() {
                return Err(SparsimError::Parse {
                    row: row_no,
                    message: format!("expected {} fields, found {}", header.len(), record.len()),
                });
            }
            let label = record[0].trim().to_string();
            let mut row = Vec::with_capacity(col_labels.len());
            for (j, field) in record.iter().skip(1).enumerate() {
                let text = field.trim();
                if missing.contains(text) {
                    row.push(Cell::MISSING);
                    continue;
                }
                let cell = text
                    .parse::<f64>()
                    .ok()
                    .and_then(Cell::try_observed)
                    .ok_or_else(|| SparsimError::BadValue {
                        row: label.clone(),
                        column: col_labels[j].clone(),
                        text: text.to_string(),
                    })?;
                row.push(cell);
            }
            row_labels.push(label);
            rows.push(row);
        }
        Self::new(row_labels, col_labels, rows)
    }

    /// Writes the matrix back as CSV. Missing cells become empty fields and
    /// values use the shortest exact round-trip representation.
    pub fn write_csv<W: Write>(&self, writer: W, id_header: &str) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        let mut header = vec![id_header.to_string()];
        header.extend(self.col_labels.iter().cloned());
        wtr.write_record(&header)?;
        for (label, row) in self.row_labels.iter().zip(self.rows()) {
            let mut record = vec![label.clone()];
            record.extend(
                row.iter()
                    .map(|c| c.value().map(|v| v.to_string()).unwrap_or_default()),
            );
            wtr.write_record(&record)?;
        }
        wtr.flush()
            .map_err(|e| SparsimError::io("<csv writer>", e))?;
        Ok(())
    }

    /// SHA-256 of the canonical CSV serialization, hex encoded.
    pub fn digest(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf, "id")
            .expect("writing to memory cannot fail");
        let hash = Sha256::digest(&buf);
        hash.iter().map(|b| format!("{b:02x}")).collect()
    }
}
