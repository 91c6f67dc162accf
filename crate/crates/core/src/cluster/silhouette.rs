use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::MaterializedMatrix;
use crate::error::{Error, Result};
use crate::metric::Metric;

/// Above this many rows the silhouette is computed on a seeded subsample.
pub const SILHOUETTE_SAMPLE_CAP: usize = 5000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Silhouette {
    /// One score per scored row (every row, or the sample when `sampled`).
    pub per_point: Vec<f64>,
    pub mean: f64,
    pub sampled: bool,
    /// Matrix row positions the scores belong to, ascending; `None` means all rows.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_indices: Option<Vec<usize>>,
}

/// Exact silhouette over every row.
pub fn silhouette(
    matrix: &MaterializedMatrix,
    labels: &[usize],
    metric: Metric,
) -> Result<Silhouette> {
    let positions: Vec<usize> = (0..matrix.n_rows()).collect();
    let (per_point, mean) = scores(matrix, &positions, labels, metric)?;
    Ok(Silhouette {
        per_point,
        mean,
        sampled: false,
        sample_indices: None,
    })
}

/// Exact up to [`SILHOUETTE_SAMPLE_CAP`] rows, otherwise computed on a
/// uniform subsample of that size drawn with `seed`.
pub fn silhouette_sampled(
    matrix: &MaterializedMatrix,
    labels: &[usize],
    metric: Metric,
    seed: u64,
) -> Result<Silhouette> {
    let n = matrix.n_rows();
    if n <= SILHOUETTE_SAMPLE_CAP {
        return silhouette(matrix, labels, metric);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut positions = rand::seq::index::sample(&mut rng, n, SILHOUETTE_SAMPLE_CAP).into_vec();
    positions.sort_unstable();
    let (per_point, mean) = scores(matrix, &positions, labels, metric)?;
    Ok(Silhouette {
        per_point,
        mean,
        sampled: true,
        sample_indices: Some(positions),
    })
}

fn scores(
    matrix: &MaterializedMatrix,
    positions: &[usize],
    labels: &[usize],
    metric: Metric,
) -> Result<(Vec<f64>, f64)> {
    if labels.len() != matrix.n_rows() {
        return Err(Error::invalid(format!(
            "{} labels for {} rows",
            labels.len(),
            matrix.n_rows()
        )));
    }
    metric.check_rows(positions.iter().map(|&p| matrix.row(p)))?;
    let k = positions.iter().map(|&p| labels[p] + 1).max().unwrap_or(0);
    let mut sizes = vec![0usize; k];
    for &p in positions {
        sizes[labels[p]] += 1;
    }
    if sizes.iter().filter(|&&s| s > 0).count() < 2 {
        return Err(Error::invalid(
            "silhouette needs at least two non-empty clusters",
        ));
    }

    let m = positions.len();
    // sums[i * k + c] = total distance from point i to members of cluster c
    let mut sums = vec![0.0; m * k];
    for a in 0..m {
        let (pa, la) = (positions[a], labels[positions[a]]);
        for b in a + 1..m {
            let pb = positions[b];
            let d = metric.distance(matrix.row(pa), matrix.row(pb));
            sums[a * k + labels[pb]] += d;
            sums[b * k + la] += d;
        }
    }
    let per_point: Vec<f64> = (0..m)
        .map(|i| {
            let own = labels[positions[i]];
            if sizes[own] == 1 {
                return 0.0;
            }
            let a = sums[i * k + own] / (sizes[own] - 1) as f64;
            let b = (0..k)
                .filter(|&c| c != own && sizes[c] > 0)
                .map(|c| sums[i * k + c] / sizes[c] as f64)
                .fold(f64::INFINITY, f64::min);
            let denom = a.max(b);
            if denom > 0.0 {
                (b - a) / denom
            } else {
                0.0
            }
        })
        .collect();
    let mean = per_point.iter().sum::<f64>() / m as f64;
    Ok((per_point, mean))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equidistant_point_scores_zero() {
        // point 1 sits at distance 1 from its partner and from the other cluster
        let m = MaterializedMatrix::from_rows(&[vec![0.0], vec![1.0], vec![2.0], vec![2.0]], false)
            .unwrap();
        let s = silhouette(&m, &[0, 0, 1, 1], Metric::Euclidean).unwrap();
        assert_eq!(s.per_point[1], 0.0);
    }

    #[test]
    fn singleton_scores_zero_and_single_cluster_rejected() {
        let m = MaterializedMatrix::from_rows(&[vec![0.0], vec![1.0], vec![5.0]], false).unwrap();
        let s = silhouette(&m, &[0, 0, 1], Metric::Euclidean).unwrap();
        assert_eq!(s.per_point[2], 0.0);
        assert!(silhouette(&m, &[0, 0, 0], Metric::Euclidean).is_err());
        assert!(silhouette(&m, &[0, 1], Metric::Euclidean).is_err());
    }

    #[test]
    fn large_inputs_are_subsampled_deterministically() {
        let rows: Vec<Vec<f64>> = (0..SILHOUETTE_SAMPLE_CAP + 10)
            .map(|i| vec![(i % 2) as f64 * 10.0 + (i % 7) as f64 * 0.01])
            .collect();
        let labels: Vec<usize> = (0..rows.len()).map(|i| i % 2).collect();
        let m = MaterializedMatrix::from_rows(&rows, false).unwrap();
        let a = silhouette_sampled(&m, &labels, Metric::Euclidean, 9).unwrap();
        let b = silhouette_sampled(&m, &labels, Metric::Euclidean, 9).unwrap();
        assert!(a.sampled);
        assert_eq!(a.per_point.len(), SILHOUETTE_SAMPLE_CAP);
        assert_eq!(a, b);
        assert!(a.mean > 0.99);
    }
}
