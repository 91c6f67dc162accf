//! Per-feature summaries, histograms and group-vs-global comparisons.
//!
//! Summaries are computed on the matrix's source-unit values (after imputation).

use serde::{Deserialize, Serialize};

use super::outliers::{robust_flags, DEFAULT_OUTLIER_THRESHOLD};
use crate::data::{FeatureId, MaterializedMatrix, RowId};
use crate::error::{Error, Result};

pub const DEFAULT_BINS: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub bin_edges: Vec<f64>,
    pub counts: Vec<usize>,
}

impl Histogram {
    /// Equal-width bins over `[min, max]`; a single value gets one unit-wide bin.
    pub fn edges(min: f64, max: f64, bins: usize) -> Vec<f64> {
        if min == max {
            return vec![min - 0.5, max + 0.5];
        }
        let width = (max - min) / bins as f64;
        let mut edges: Vec<f64> = (0..bins).map(|i| min + i as f64 * width).collect();
        edges.push(max);
        edges
    }

    pub fn with_edges(edges: Vec<f64>, values: &[f64]) -> Self {
        let k = edges.len() - 1;
        let mut counts = vec![0usize; k];
        let lo = edges[0];
        let width = (edges[k] - lo) / k as f64;
        for &x in values {
            let mut idx = (((x - lo) / width).floor().max(0.0) as usize).min(k - 1);
            while idx > 0 && x < edges[idx] {
                idx -= 1;
            }
            while idx < k - 1 && x >= edges[idx + 1] {
                idx += 1;
            }
            counts[idx] += 1;
        }
        Self {
            bin_edges: edges,
            counts,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSummary {
    pub feature_id: FeatureId,
    pub name: String,
    pub count: usize,
    pub mean: f64,
    /// Sample standard deviation; 0 for a single value.
    pub std: f64,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub histogram: Histogram,
    pub outlier_count: usize,
}

/// Quantile of sorted data by linear interpolation between closest ranks.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

fn summarize_values(
    feature_id: FeatureId,
    name: &str,
    values: &[f64],
    edges: Option<Vec<f64>>,
    bins: usize,
    outlier_count: usize,
) -> FeatureSummary {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let mean = sorted.iter().sum::<f64>() / n as f64;
    let std = if n > 1 {
        (sorted.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    let (min, max) = (sorted[0], sorted[n - 1]);
    let edges = edges.unwrap_or_else(|| Histogram::edges(min, max, bins));
    FeatureSummary {
        feature_id,
        name: name.to_string(),
        count: n,
        mean,
        std,
        min,
        q1: quantile_sorted(&sorted, 0.25),
        median: quantile_sorted(&sorted, 0.5),
        q3: quantile_sorted(&sorted, 0.75),
        max,
        histogram: Histogram::with_edges(edges, values),
        outlier_count,
    }
}

pub fn summarize(matrix: &MaterializedMatrix, bins: usize) -> Result<Vec<FeatureSummary>> {
    if bins == 0 {
        return Err(Error::invalid("bins must be at least 1"));
    }
    Ok((0..matrix.n_cols())
        .map(|j| {
            let values = matrix.raw_column(j);
            let outliers = robust_flags(&values, DEFAULT_OUTLIER_THRESHOLD)
                .iter()
                .filter(|&&f| f)
                .count();
            summarize_values(
                matrix.feature_ids[j],
                &matrix.feature_names[j],
                &values,
                None,
                bins,
                outliers,
            )
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionComparison {
    pub group: FeatureSummary,
    pub global: FeatureSummary,
}

/// Summaries of a row group next to the global ones. Group histograms reuse
/// the global bin edges so the two overlay bin-for-bin.
pub fn compare_distributions(
    matrix: &MaterializedMatrix,
    group_rows: &[RowId],
    bins: usize,
) -> Result<Vec<DistributionComparison>> {
    if group_rows.is_empty() {
        return Err(Error::invalid("comparison group is empty"));
    }
    let mut positions = Vec::with_capacity(group_rows.len());
    for &r in group_rows {
        let p = matrix
            .position_of_row(r)
            .ok_or_else(|| Error::invalid(format!("row {r} is not part of the matrix")))?;
        positions.push(p);
    }
    positions.sort_unstable();
    positions.dedup();
    let global = summarize(matrix, bins)?;
    Ok(global
        .into_iter()
        .enumerate()
        .map(|(j, g)| {
            let values: Vec<f64> = positions.iter().map(|&p| matrix.raw_row(p)[j]).collect();
            let outliers = robust_flags(&values, DEFAULT_OUTLIER_THRESHOLD)
                .iter()
                .filter(|&&f| f)
                .count();
            let group = summarize_values(
                g.feature_id,
                &g.name,
                &values,
                Some(g.histogram.bin_edges.clone()),
                bins,
                outliers,
            );
            DistributionComparison { group, global: g }
        })
        .collect())
}
