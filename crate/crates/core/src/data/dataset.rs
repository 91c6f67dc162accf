//! Typed tabular datasets and CSV ingestion.
//!
//! Each column is either numeric or categorical. A column is numeric iff
//! every non-missing cell parses as a finite number. Missing cells are
//! tracked by a per-column mask; the stored value of a missing numeric cell
//! is `NaN` and of a missing categorical cell the empty string.

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub type RowId = usize;
pub type FeatureId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnKind {
    Numeric,
    Categorical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnMeta {
    pub name: String,
    pub kind: ColumnKind,
    /// Canonical source expression for engineered columns.
    pub derived: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ColumnValues {
    Numeric(Vec<f64>),
    Categorical(Vec<String>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub meta: ColumnMeta,
    pub values: ColumnValues,
    pub missing: Vec<bool>,
}

impl Column {
    pub fn name(&self) -> &str {
        &self.meta.name
    }

    pub fn kind(&self) -> ColumnKind {
        self.meta.kind
    }

    pub fn len(&self) -> usize {
        self.missing.len()
    }

    pub fn is_empty(&self) -> bool {
        self.missing.is_empty()
    }

    pub fn numeric(&self) -> Option<&[f64]> {
        match &self.values {
            ColumnValues::Numeric(v) => Some(v),
            ColumnValues::Categorical(_) => None,
        }
    }

    pub fn cell(&self, row: RowId) -> Cell<'_> {
        if self.missing[row] {
            return Cell::Missing;
        }
        match &self.values {
            ColumnValues::Numeric(v) => Cell::Number(v[row]),
            ColumnValues::Categorical(v) => Cell::Text(&v[row]),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell<'a> {
    Number(f64),
    Text(&'a str),
    Missing,
}

/// Where a dataset came from. `path` is empty for in-memory sources.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DataSource {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CsvOptions {
    pub delimiter: char,
    pub missing_tokens: Vec<String>,
}

impl Default for CsvOptions {
    fn default() -> Self {
        Self {
            delimiter: ',',
            missing_tokens: vec!["".into(), "NA".into(), "NaN".into()],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    name: String,
    columns: Vec<Column>,
    n_rows: usize,
    source: DataSource,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Reads and types a CSV file. The first record is the header.
pub fn load_csv(path: impl AsRef<Path>, options: &CsvOptions) -> Result<Dataset> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let mut ds = Dataset::from_csv_bytes(&name, &bytes, options)?;
    ds.source.path = path.to_string_lossy().into_owned();
    Ok(ds)
}

impl Dataset {
    pub fn from_csv_bytes(name: &str, bytes: &[u8], options: &CsvOptions) -> Result<Self> {
        if !options.delimiter.is_ascii() {
            return Err(Error::invalid(
                "CSV delimiter must be a single ASCII character",
            ));
        }
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .delimiter(options.delimiter as u8)
            .from_reader(bytes);

        let mut records = reader.records();
        let header = match records.next() {
            Some(r) => r.map_err(|e| Error::Csv(e.to_string()))?,
            None => return Err(Error::Csv("missing header row".into())),
        };
        let names: Vec<String> = header.iter().map(|h| h.trim().to_string()).collect();
        let n_cols = names.len();

        let mut raw: Vec<Vec<String>> = vec![Vec::new(); n_cols];
        for (row, rec) in records.enumerate() {
            let rec = rec.map_err(|e| Error::Csv(e.to_string()))?;
            if rec.len() != n_cols {
                return Err(Error::RaggedRow {
                    row,
                    expected: n_cols,
                    found: rec.len(),
                });
            }
            for (col, cell) in rec.iter().enumerate() {
                raw[col].push(cell.trim().to_string());
            }
        }

        let columns = names
            .into_iter()
            .zip(raw)
            .map(|(name, cells)| type_column(name, cells, &options.missing_tokens))
            .collect();
        Self::from_columns(
            name,
            columns,
            DataSource {
                path: String::new(),
                sha256: sha256_hex(bytes),
            },
        )
    }

    pub fn from_columns(name: &str, columns: Vec<Column>, source: DataSource) -> Result<Self> {
        let n_rows = columns.first().map_or(0, Column::len);
        let mut seen = HashSet::new();
        for (i, c) in columns.iter().enumerate() {
            if c.meta.name.is_empty() {
                return Err(Error::EmptyColumnName(i));
            }
            if !seen.insert(c.meta.name.as_str()) {
                return Err(Error::DuplicateColumn(c.meta.name.clone()));
            }
            let values_len = match &c.values {
                ColumnValues::Numeric(v) => v.len(),
                ColumnValues::Categorical(v) => v.len(),
            };
            if c.len() != n_rows || values_len != n_rows {
                return Err(Error::invalid(format!(
                    "column '{}' has {} cells, expected {}",
                    c.meta.name, values_len, n_rows
                )));
            }
        }
        Ok(Self {
            name: name.to_string(),
            columns,
            n_rows,
            source,
        })
    }

    /// Builds an all-numeric dataset from dense rows; `None` marks a missing cell.
    pub fn from_numeric_rows(names: &[&str], rows: &[Vec<Option<f64>>]) -> Result<Self> {
        let mut cols: Vec<(Vec<f64>, Vec<bool>)> = vec![(Vec::new(), Vec::new()); names.len()];
        for (r, row) in rows.iter().enumerate() {
            if row.len() != names.len() {
                return Err(Error::RaggedRow {
                    row: r,
                    expected: names.len(),
                    found: row.len(),
                });
            }
            for (c, v) in row.iter().enumerate() {
                cols[c].0.push(v.unwrap_or(f64::NAN));
                cols[c].1.push(v.is_none());
            }
        }
        let columns = names
            .iter()
            .zip(cols)
            .map(|(n, (values, missing))| Column {
                meta: ColumnMeta {
                    name: (*n).to_string(),
                    kind: ColumnKind::Numeric,
                    derived: None,
                },
                values: ColumnValues::Numeric(values),
                missing,
            })
            .collect();
        let mut hasher = Sha256::new();
        for row in rows {
            for v in row {
                hasher.update(v.unwrap_or(f64::NAN).to_le_bytes());
            }
        }
        Self::from_columns(
            "memory",
            columns,
            DataSource {
                path: String::new(),
                sha256: hex::encode(hasher.finalize()),
            },
        )
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn source(&self) -> &DataSource {
        &self.source
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn column(&self, id: FeatureId) -> &Column {
        &self.columns[id]
    }

    pub fn column_index(&self, name: &str) -> Option<FeatureId> {
        self.columns.iter().position(|c| c.meta.name == name)
    }

    pub fn cell(&self, row: RowId, col: FeatureId) -> Cell<'_> {
        self.columns[col].cell(row)
    }

    pub fn numeric_columns(&self) -> Vec<FeatureId> {
        (0..self.columns.len())
            .filter(|&i| self.columns[i].kind() == ColumnKind::Numeric)
            .collect()
    }

    /// `(name, expression)` for every engineered column, in creation order.
    pub fn derived_columns(&self) -> Vec<(String, String)> {
        self.columns
            .iter()
            .filter_map(|c| {
                c.meta
                    .derived
                    .as_ref()
                    .map(|e| (c.meta.name.clone(), e.clone()))
            })
            .collect()
    }

    pub(crate) fn with_appended(&self, column: Column) -> Result<Self> {
        let mut columns = self.columns.clone();
        columns.push(column);
        Self::from_columns(&self.name, columns, self.source.clone())
    }
}

fn type_column(name: String, cells: Vec<String>, missing_tokens: &[String]) -> Column {
    let missing: Vec<bool> = cells
        .iter()
        .map(|c| missing_tokens.iter().any(|t| t == c))
        .collect();
    let parsed: Option<Vec<f64>> = cells
        .iter()
        .zip(&missing)
        .map(|(c, &m)| {
            if m {
                Some(f64::NAN)
            } else {
                c.parse::<f64>().ok().filter(|v| v.is_finite())
            }
        })
        .collect();
    let (kind, values) = match parsed {
        Some(v) => (ColumnKind::Numeric, ColumnValues::Numeric(v)),
        None => {
            let v = cells
                .into_iter()
                .zip(&missing)
                .map(|(c, &m)| if m { String::new() } else { c })
                .collect();
            (ColumnKind::Categorical, ColumnValues::Categorical(v))
        }
    };
    Column {
        meta: ColumnMeta {
            name,
            kind,
            derived: None,
        },
        values,
        missing,
    }
}
