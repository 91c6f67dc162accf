use serde::{Deserialize, Serialize};

use crate::data::{MaterializedMatrix, RowId};
use crate::error::{Error, Result};
use crate::metric::Metric;

pub const DEFAULT_HEATMAP_CAP: usize = 512;

/// Pairwise distances with rows ordered by (cluster label, row id).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceMatrixView {
    pub order: Vec<RowId>,
    /// Labels in `order`.
    pub labels: Vec<usize>,
    pub metric: Metric,
    pub cap: usize,
    /// Consecutive ordered rows averaged into each output cell (1 = no aggregation).
    pub block_size: usize,
    /// `m × m` values with `m <= cap`.
    pub values: Vec<Vec<f64>>,
}

/// Distance heatmap sorted by cluster. When `n > cap`, contiguous blocks of
/// `ceil(n / cap)` ordered rows are averaged so the output side stays
/// within `cap`.
pub fn distance_matrix(
    matrix: &MaterializedMatrix,
    metric: Metric,
    labels: &[usize],
    cap: usize,
) -> Result<DistanceMatrixView> {
    let n = matrix.n_rows();
    if labels.len() != n {
        return Err(Error::invalid(format!(
            "{} labels for {n} rows",
            labels.len()
        )));
    }
    if cap == 0 {
        return Err(Error::invalid("heatmap cap must be positive"));
    }
    metric.check_rows((0..n).map(|i| matrix.row(i)))?;
    let mut positions: Vec<usize> = (0..n).collect();
    positions.sort_by_key(|&p| (labels[p], matrix.row_ids[p]));

    let block = n.div_ceil(cap).max(1);
    let m = n.div_ceil(block);
    let mut sums = vec![vec![0.0; m]; m];
    for a in 0..n {
        for b in a + 1..n {
            let d = metric.distance(matrix.row(positions[a]), matrix.row(positions[b]));
            let (ba, bb) = (a / block, b / block);
            sums[ba][bb] += d;
            sums[bb][ba] += d;
        }
    }
    let block_len = |i: usize| (n - i * block).min(block) as f64;
    let values = (0..m)
        .map(|i| {
            (0..m)
                .map(|j| sums[i][j] / (block_len(i) * block_len(j)))
                .collect()
        })
        .collect();
    Ok(DistanceMatrixView {
        order: positions.iter().map(|&p| matrix.row_ids[p]).collect(),
        labels: positions.iter().map(|&p| labels[p]).collect(),
        metric,
        cap,
        block_size: block,
        values,
    })
}
