use serde::{Deserialize, Serialize};

use crate::data::{FeatureId, MaterializedMatrix};
use crate::error::{Error, Result};

/// Features × clusters mean matrix in source units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterProfile {
    pub feature_ids: Vec<FeatureId>,
    pub feature_names: Vec<String>,
    /// `means[f][c]`.
    pub means: Vec<Vec<f64>>,
    /// Each row min-max scaled to `[0, 1]`; rows with no spread are 0.5.
    pub normalized: Vec<Vec<f64>>,
}

pub fn cluster_profile(matrix: &MaterializedMatrix, labels: &[usize]) -> Result<ClusterProfile> {
    let (n, f) = (matrix.n_rows(), matrix.n_cols());
    if labels.len() != n {
        return Err(Error::invalid(format!(
            "{} labels for {n} rows",
            labels.len()
        )));
    }
    let k = labels.iter().max().map_or(0, |m| m + 1);
    let mut counts = vec![0usize; k];
    let mut sums = vec![vec![0.0; k]; f];
    for (i, &l) in labels.iter().enumerate() {
        counts[l] += 1;
        for (j, v) in matrix.raw_row(i).iter().enumerate() {
            sums[j][l] += v;
        }
    }
    if let Some(c) = counts.iter().position(|&c| c == 0) {
        return Err(Error::invalid(format!("cluster {c} is empty")));
    }
    let means: Vec<Vec<f64>> = sums
        .into_iter()
        .map(|row| {
            row.iter()
                .zip(&counts)
                .map(|(s, &c)| s / c as f64)
                .collect()
        })
        .collect();
    let normalized = means
        .iter()
        .map(|row: &Vec<f64>| {
            let lo = row.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            row.iter()
                .map(|v| {
                    if hi > lo {
                        ((v - lo) / (hi - lo)).clamp(0.0, 1.0)
                    } else {
                        0.5
                    }
                })
                .collect()
        })
        .collect();
    Ok(ClusterProfile {
        feature_ids: matrix.feature_ids.clone(),
        feature_names: matrix.feature_names.clone(),
        means,
        normalized,
    })
}
