use serde::{Deserialize, Serialize};

use crate::data::{FeatureId, MaterializedMatrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelatedPair {
    pub feature_a: FeatureId,
    pub feature_b: FeatureId,
    pub r: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationResult {
    pub feature_ids: Vec<FeatureId>,
    /// `f × f` Pearson coefficients, row-major.
    pub matrix: Vec<Vec<f64>>,
    /// Zero-variance features; their pairs are reported as r = 0.
    pub degenerate: Vec<bool>,
    pub top_pairs: Vec<CorrelatedPair>,
}

/// Pearson correlation between every pair of features.
///
/// `top_pairs` holds at most `top_k` non-degenerate pairs ordered by |r|
/// descending, ties by (a, b) position ascending.
pub fn correlations(matrix: &MaterializedMatrix, top_k: usize) -> Result<CorrelationResult> {
    let (n, f) = (matrix.n_rows(), matrix.n_cols());
    if n < 2 {
        return Err(Error::invalid("correlation needs at least two rows"));
    }
    let centered: Vec<Vec<f64>> = (0..f)
        .map(|j| {
            let col = matrix.column(j);
            let mean = col.iter().sum::<f64>() / n as f64;
            col.into_iter().map(|v| v - mean).collect()
        })
        .collect();
    let norms: Vec<f64> = centered
        .iter()
        .map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt())
        .collect();
    let degenerate: Vec<bool> = (0..f)
        .map(|j| matrix.zero_variance[j] || norms[j] == 0.0)
        .collect();

    let mut r = vec![vec![0.0; f]; f];
    for a in 0..f {
        if degenerate[a] {
            continue;
        }
        r[a][a] = 1.0;
        for b in a + 1..f {
            if degenerate[b] {
                continue;
            }
            let dot: f64 = centered[a]
                .iter()
                .zip(&centered[b])
                .map(|(x, y)| x * y)
                .sum();
            let v = (dot / (norms[a] * norms[b])).clamp(-1.0, 1.0);
            r[a][b] = v;
            r[b][a] = v;
        }
    }

    let mut pairs: Vec<(usize, usize)> = (0..f)
        .flat_map(|a| (a + 1..f).map(move |b| (a, b)))
        .filter(|&(a, b)| !degenerate[a] && !degenerate[b])
        .collect();
    pairs.sort_by(|&(a1, b1), &(a2, b2)| {
        r[a2][b2]
            .abs()
            .total_cmp(&r[a1][b1].abs())
            .then((a1, b1).cmp(&(a2, b2)))
    });
    let top_pairs = pairs
        .into_iter()
        .take(top_k)
        .map(|(a, b)| CorrelatedPair {
            feature_a: matrix.feature_ids[a],
            feature_b: matrix.feature_ids[b],
            r: r[a][b],
        })
        .collect();

    Ok(CorrelationResult {
        feature_ids: matrix.feature_ids.clone(),
        matrix: r,
        degenerate,
        top_pairs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn self_and_negation() {
        let rows: Vec<Vec<f64>> = [1.0, 4.0, 2.0, 8.0]
            .iter()
            .map(|&x| vec![x, x, -x, 3.0])
            .collect();
        let m = MaterializedMatrix::from_rows(&rows, false).unwrap();
        let c = correlations(&m, 10).unwrap();
        assert!((c.matrix[0][1] - 1.0).abs() < 1e-15);
        assert!((c.matrix[0][2] + 1.0).abs() < 1e-15);
        assert_eq!(c.matrix[3][3], 0.0);
        assert_eq!(c.degenerate, vec![false, false, false, true]);
        assert_eq!(c.top_pairs.len(), 3);
        assert!(c
            .top_pairs
            .iter()
            .all(|p| p.feature_a != 3 && p.feature_b != 3));
        // all |r| == 1, so ties resolve by index pair
        let order: Vec<_> = c
            .top_pairs
            .iter()
            .map(|p| (p.feature_a, p.feature_b))
            .collect();
        assert_eq!(order, vec![(0, 1), (0, 2), (1, 2)]);
    }

    #[test]
    fn needs_two_rows() {
        let m = MaterializedMatrix::from_rows(&[vec![1.0, 2.0]], false).unwrap();
        assert!(correlations(&m, 1).is_err());
    }
}
