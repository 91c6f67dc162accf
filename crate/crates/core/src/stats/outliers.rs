//! Robust z-score outlier flags.

use serde::{Deserialize, Serialize};

use crate::data::matrix::median_of;
use crate::data::MaterializedMatrix;

pub const DEFAULT_OUTLIER_THRESHOLD: f64 = 3.5;
/// Scales the median absolute deviation to a normal-consistent sigma.
pub const MAD_SCALE: f64 = 1.4826;
/// Scales the mean absolute deviation when the MAD collapses to zero.
pub const MEAN_AD_SCALE: f64 = 1.253314;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutlierReport {
    pub threshold: f64,
    /// Row-major `n_rows × n_cols` flags.
    pub flags: Vec<bool>,
    pub n_cols: usize,
    /// Flagged-cell count per row.
    pub row_scores: Vec<usize>,
    pub feature_counts: Vec<usize>,
}

impl OutlierReport {
    pub fn is_flagged(&self, row: usize, col: usize) -> bool {
        self.flags[row * self.n_cols + col]
    }
}

/// `|x - median| / (1.4826 * MAD) > threshold`.
///
/// When more than half the values sit on the median the MAD is 0 and the
/// scale falls back to `1.253314 * mean absolute deviation`; a constant
/// column has both at 0 and is never flagged.
pub fn robust_flags(values: &[f64], threshold: f64) -> Vec<bool> {
    if values.is_empty() {
        return Vec::new();
    }
    let median = median_of(&mut values.to_vec());
    let mut dev: Vec<f64> = values.iter().map(|v| (v - median).abs()).collect();
    let mean_ad = dev.iter().sum::<f64>() / dev.len() as f64;
    let mad = median_of(&mut dev);
    let sigma = if mad > 0.0 {
        MAD_SCALE * mad
    } else {
        MEAN_AD_SCALE * mean_ad
    };
    if sigma == 0.0 {
        return vec![false; values.len()];
    }
    values
        .iter()
        .map(|v| (v - median).abs() / sigma > threshold)
        .collect()
}

pub fn outlier_flags(matrix: &MaterializedMatrix) -> OutlierReport {
    outlier_flags_with(matrix, DEFAULT_OUTLIER_THRESHOLD)
}

pub fn outlier_flags_with(matrix: &MaterializedMatrix, threshold: f64) -> OutlierReport {
    let (n, f) = (matrix.n_rows(), matrix.n_cols());
    let mut flags = vec![false; n * f];
    let mut feature_counts = vec![0; f];
    for j in 0..f {
        for (i, flagged) in robust_flags(&matrix.raw_column(j), threshold)
            .into_iter()
            .enumerate()
        {
            if flagged {
                flags[i * f + j] = true;
                feature_counts[j] += 1;
            }
        }
    }
    let row_scores = (0..n)
        .map(|i| flags[i * f..(i + 1) * f].iter().filter(|&&b| b).count())
        .collect();
    OutlierReport {
        threshold,
        flags,
        n_cols: f,
        row_scores,
        feature_counts,
    }
}
