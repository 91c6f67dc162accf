//! Dense numeric view of a solution: selected rows × enabled numeric features.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::dataset::{Dataset, FeatureId, RowId};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaterializedMatrix {
    pub row_ids: Vec<RowId>,
    pub feature_ids: Vec<FeatureId>,
    pub feature_names: Vec<String>,
    n_rows: usize,
    n_cols: usize,
    /// Row-major values, standardized when `standardized` is set.
    data: Vec<f64>,
    /// Row-major values in source units, after imputation.
    raw: Vec<f64>,
    pub standardized: bool,
    /// Per-feature mean of the imputed raw values.
    pub column_means: Vec<f64>,
    /// Per-feature sample standard deviation (n - 1) of the imputed raw values.
    pub column_stds: Vec<f64>,
    pub zero_variance: Vec<bool>,
    /// Number of imputed cells per feature.
    pub imputed: Vec<usize>,
}

impl MaterializedMatrix {
    /// Builds a matrix directly from raw rows (no missing values).
    pub fn from_rows(rows: &[Vec<f64>], standardize: bool) -> Result<Self> {
        let n_cols = rows.first().map_or(0, Vec::len);
        if rows.is_empty() || n_cols == 0 {
            return Err(Error::invalid(
                "matrix needs at least one row and one column",
            ));
        }
        if rows.iter().any(|r| r.len() != n_cols) {
            return Err(Error::invalid("rows have different lengths"));
        }
        if rows.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::invalid("matrix values must be finite"));
        }
        let raw: Vec<f64> = rows.iter().flatten().copied().collect();
        Ok(Self::build(
            (0..rows.len()).collect(),
            (0..n_cols).collect(),
            (0..n_cols).map(|j| format!("f{j}")).collect(),
            raw,
            vec![0; n_cols],
            standardize,
        ))
    }

    fn build(
        row_ids: Vec<RowId>,
        feature_ids: Vec<FeatureId>,
        feature_names: Vec<String>,
        raw: Vec<f64>,
        imputed: Vec<usize>,
        standardize: bool,
    ) -> Self {
        let n_rows = row_ids.len();
        let n_cols = feature_ids.len();
        let mut column_means = vec![0.0; n_cols];
        let mut column_stds = vec![0.0; n_cols];
        let mut zero_variance = vec![false; n_cols];
        for j in 0..n_cols {
            let col = (0..n_rows).map(|i| raw[i * n_cols + j]);
            let mean = col.clone().sum::<f64>() / n_rows as f64;
            let ss: f64 = col.clone().map(|v| (v - mean) * (v - mean)).sum();
            column_means[j] = mean;
            column_stds[j] = if n_rows > 1 {
                (ss / (n_rows - 1) as f64).sqrt()
            } else {
                0.0
            };
            let first = raw[j];
            zero_variance[j] = col.clone().all(|v| v == first);
        }
        let data = if standardize {
            let mut d = raw.clone();
            for i in 0..n_rows {
                for j in 0..n_cols {
                    if !zero_variance[j] {
                        let v = &mut d[i * n_cols + j];
                        *v = (*v - column_means[j]) / column_stds[j];
                    }
                }
            }
            d
        } else {
            raw.clone()
        };
        Self {
            row_ids,
            feature_ids,
            feature_names,
            n_rows,
            n_cols,
            data,
            raw,
            standardized: standardize,
            column_means,
            column_stds,
            zero_variance,
            imputed,
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn raw(&self) -> &[f64] {
        &self.raw
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn raw_row(&self, i: usize) -> &[f64] {
        &self.raw[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n_cols + j]
    }

    pub fn raw_column(&self, j: usize) -> Vec<f64> {
        (0..self.n_rows)
            .map(|i| self.raw[i * self.n_cols + j])
            .collect()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n_rows)
            .map(|i| self.data[i * self.n_cols + j])
            .collect()
    }

    /// Position of a dataset row id within this matrix.
    pub fn position_of_row(&self, row: RowId) -> Option<usize> {
        self.row_ids.binary_search(&row).ok()
    }

    pub fn position_of_feature(&self, feature: FeatureId) -> Option<usize> {
        self.feature_ids.iter().position(|&f| f == feature)
    }

    /// Sub-matrix over the given row positions, recomputing statistics.
    pub fn select_rows(&self, positions: &[usize]) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::invalid("empty row selection"));
        }
        let mut raw = Vec::with_capacity(positions.len() * self.n_cols);
        let mut row_ids = Vec::with_capacity(positions.len());
        for &p in positions {
            if p >= self.n_rows {
                return Err(Error::invalid(format!("row position {p} out of range")));
            }
            raw.extend_from_slice(self.raw_row(p));
            row_ids.push(self.row_ids[p]);
        }
        Ok(Self::build(
            row_ids,
            self.feature_ids.clone(),
            self.feature_names.clone(),
            raw,
            vec![0; self.n_cols],
            self.standardized,
        ))
    }
}

pub(crate) fn median_of(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    }
}

/// Dense matrix for `rows × features`, imputing missing cells with the column
/// median over the selected rows and optionally z-scoring each feature.
/// Zero-variance features are flagged and never rescaled.
pub fn materialize(
    dataset: &Dataset,
    rows: &BTreeSet<RowId>,
    features: &[FeatureId],
    standardize: bool,
) -> Result<MaterializedMatrix> {
    if rows.is_empty() {
        return Err(Error::invalid("no rows selected"));
    }
    if features.is_empty() {
        return Err(Error::invalid("no features selected"));
    }
    if let Some(&r) = rows.iter().next_back() {
        if r >= dataset.n_rows() {
            return Err(Error::invalid(format!("row id {r} out of range")));
        }
    }
    let mut seen = BTreeSet::new();
    let mut columns = Vec::with_capacity(features.len());
    for &f in features {
        if f >= dataset.n_cols() {
            return Err(Error::invalid(format!("feature id {f} out of range")));
        }
        if !seen.insert(f) {
            return Err(Error::invalid(format!("feature id {f} listed twice")));
        }
        let col = dataset.column(f);
        let values = col
            .numeric()
            .ok_or_else(|| Error::NotNumeric(col.name().to_string()))?;
        let mut present: Vec<f64> = rows
            .iter()
            .filter(|&&r| !col.missing[r])
            .map(|&r| values[r])
            .collect();
        if present.is_empty() {
            return Err(Error::AllMissing(col.name().to_string()));
        }
        let fill = median_of(&mut present);
        columns.push((col, values, fill));
    }

    let n_cols = features.len();
    let mut raw = Vec::with_capacity(rows.len() * n_cols);
    let mut imputed = vec![0usize; n_cols];
    for &r in rows {
        for (j, (col, values, fill)) in columns.iter().enumerate() {
            if col.missing[r] {
                imputed[j] += 1;
                raw.push(*fill);
            } else {
                raw.push(values[r]);
            }
        }
    }
    let names = columns
        .iter()
        .map(|(c, _, _)| c.name().to_string())
        .collect();
    Ok(MaterializedMatrix::build(
        rows.iter().copied().collect(),
        features.to_vec(),
        names,
        raw,
        imputed,
        standardize,
    ))
}
