//! Clustering, silhouette validation, silhouette-vs-k sweeps and cluster
//! profiles.

mod agglomerative;
mod kmeans;
mod profile;
mod silhouette;

use std::fmt;
use std::ops::RangeInclusive;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub(crate) use agglomerative::merge_condensed as agglomerative_merge_condensed;
pub use agglomerative::{cut_dendrogram, dendrogram, Merge, MAX_AGGLOMERATIVE_ROWS};
pub use kmeans::{kmeans, KMeansFit, MAX_ITERATIONS};
pub use profile::{cluster_profile, ClusterProfile};
pub use silhouette::{silhouette, silhouette_sampled, Silhouette, SILHOUETTE_SAMPLE_CAP};

use crate::data::{MaterializedMatrix, RowId};
use crate::error::{Error, Result};
use crate::metric::Metric;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClusterAlgorithm {
    Kmeans,
    Agglomerative,
}

impl ClusterAlgorithm {
    pub const ALL: [ClusterAlgorithm; 2] =
        [ClusterAlgorithm::Kmeans, ClusterAlgorithm::Agglomerative];

    pub fn name(self) -> &'static str {
        match self {
            ClusterAlgorithm::Kmeans => "kmeans",
            ClusterAlgorithm::Agglomerative => "agglomerative",
        }
    }
}

impl fmt::Display for ClusterAlgorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ClusterAlgorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "kmeans" | "k-means" => Ok(Self::Kmeans),
            "agglomerative" | "hierarchical" => Ok(Self::Agglomerative),
            other => Err(Error::invalid(format!(
                "unknown clustering algorithm '{other}'"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Linkage {
    #[default]
    Average,
    Complete,
    Single,
}

impl Linkage {
    pub const ALL: [Linkage; 3] = [Linkage::Average, Linkage::Complete, Linkage::Single];

    pub fn name(self) -> &'static str {
        match self {
            Linkage::Average => "average",
            Linkage::Complete => "complete",
            Linkage::Single => "single",
        }
    }
}

impl fmt::Display for Linkage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Linkage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Linkage::ALL
            .into_iter()
            .find(|l| l.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::invalid(format!("unknown linkage '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusteringParams {
    pub algorithm: ClusterAlgorithm,
    pub k: usize,
    /// Agglomerative only; k-means is always euclidean.
    #[serde(default)]
    pub metric: Metric,
    #[serde(default)]
    pub linkage: Linkage,
    /// k-means seeding and silhouette subsampling.
    #[serde(default)]
    pub seed: u64,
}

impl ClusteringParams {
    pub fn kmeans(k: usize, seed: u64) -> Self {
        Self {
            algorithm: ClusterAlgorithm::Kmeans,
            k,
            metric: Metric::Euclidean,
            linkage: Linkage::Average,
            seed,
        }
    }

    pub fn agglomerative(k: usize, metric: Metric, linkage: Linkage) -> Self {
        Self {
            algorithm: ClusterAlgorithm::Agglomerative,
            k,
            metric,
            linkage,
            seed: 0,
        }
    }

    /// Metric the clustering actually optimizes, also used for its silhouette.
    pub fn effective_metric(&self) -> Metric {
        match self.algorithm {
            ClusterAlgorithm::Kmeans => Metric::Euclidean,
            ClusterAlgorithm::Agglomerative => self.metric,
        }
    }

    /// Short human-readable description, e.g. `agglomerative, k=4, euclidean`.
    pub fn describe(&self) -> String {
        let mut s = format!(
            "{}, k={}, {}",
            self.algorithm,
            self.k,
            self.effective_metric()
        );
        if self.algorithm == ClusterAlgorithm::Agglomerative && self.linkage != Linkage::Average {
            s.push_str(&format!(", {} linkage", self.linkage));
        }
        s
    }

    fn validate(&self, n: usize) -> Result<()> {
        if self.k < 2 {
            return Err(Error::invalid(format!(
                "k must be at least 2, got {}",
                self.k
            )));
        }
        if self.k > n {
            return Err(Error::invalid(format!(
                "k = {} exceeds the {n} rows",
                self.k
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusteringResult {
    pub params: ClusteringParams,
    pub row_ids: Vec<RowId>,
    /// Canonical labels in `0..k`, first row labelled 0.
    pub labels: Vec<usize>,
    pub cluster_sizes: Vec<usize>,
    /// Within-cluster sum of squares (k-means).
    pub inertia: Option<f64>,
    /// Lloyd iterations run (k-means).
    pub iterations: Option<usize>,
    pub silhouette: Silhouette,
    pub silhouette_by_k: Vec<(usize, f64)>,
    pub profile: ClusterProfile,
}

/// Relabels so that clusters are numbered by first occurrence.
pub fn canonical_labels(labels: &[usize]) -> Vec<usize> {
    let mut map = std::collections::HashMap::new();
    labels
        .iter()
        .map(|&l| {
            let next = map.len();
            *map.entry(l).or_insert(next)
        })
        .collect()
}

fn sizes(labels: &[usize], k: usize) -> Vec<usize> {
    let mut s = vec![0; k];
    for &l in labels {
        s[l] += 1;
    }
    s
}

/// Raw labels (and k-means inertia/iterations) for `params`.
fn assign(
    matrix: &MaterializedMatrix,
    params: &ClusteringParams,
) -> Result<(Vec<usize>, Option<KMeansFit>)> {
    params.validate(matrix.n_rows())?;
    match params.algorithm {
        ClusterAlgorithm::Kmeans => {
            let fit = kmeans(matrix, params.k, params.seed)?;
            Ok((fit.labels.clone(), Some(fit)))
        }
        ClusterAlgorithm::Agglomerative => {
            let merges = dendrogram(matrix, params.metric, params.linkage)?;
            Ok((cut_dendrogram(matrix.n_rows(), &merges, params.k), None))
        }
    }
}

/// Clusters the (possibly standardized) rows of `matrix`; profiles use the
/// source units. `silhouette_by_k` is left empty; see [`cluster_with_sweep`].
pub fn cluster(matrix: &MaterializedMatrix, params: &ClusteringParams) -> Result<ClusteringResult> {
    let (labels, fit) = assign(matrix, params)?;
    finish(matrix, params, labels, fit)
}

fn finish(
    matrix: &MaterializedMatrix,
    params: &ClusteringParams,
    labels: Vec<usize>,
    fit: Option<KMeansFit>,
) -> Result<ClusteringResult> {
    let labels = canonical_labels(&labels);
    let silhouette = silhouette_sampled(matrix, &labels, params.effective_metric(), params.seed)?;
    let profile = cluster_profile(matrix, &labels)?;
    Ok(ClusteringResult {
        params: *params,
        row_ids: matrix.row_ids.clone(),
        cluster_sizes: sizes(&labels, params.k),
        labels,
        inertia: fit.as_ref().map(|f| f.inertia),
        iterations: fit.as_ref().map(|f| f.iterations),
        silhouette,
        silhouette_by_k: Vec::new(),
        profile,
    })
}

/// `2..=min(10, n - 1)`, or `None` when `n < 3`.
pub fn default_k_range(n: usize) -> Option<RangeInclusive<usize>> {
    (n >= 3).then(|| 2..=10.min(n - 1))
}

/// Mean silhouette for every `k` in `k_range`, using the algorithm, metric
/// and seed of `params` (its `k` is ignored). Ordered by `k`.
pub fn silhouette_sweep(
    matrix: &MaterializedMatrix,
    params: &ClusteringParams,
    k_range: RangeInclusive<usize>,
) -> Result<Vec<(usize, f64)>> {
    let n = matrix.n_rows();
    let ks: Vec<usize> = k_range.collect();
    if ks.is_empty() {
        return Err(Error::invalid("empty k range"));
    }
    if ks[0] < 2 || *ks.last().unwrap() + 1 > n {
        return Err(Error::invalid(format!(
            "k range must lie within [2, {}]",
            n.saturating_sub(1)
        )));
    }
    let metric = params.effective_metric();
    match params.algorithm {
        ClusterAlgorithm::Agglomerative => {
            let merges = dendrogram(matrix, metric, params.linkage)?;
            parallel_map(&ks, |k| {
                let labels = cut_dendrogram(n, &merges, k);
                silhouette_sampled(matrix, &labels, metric, params.seed).map(|s| s.mean)
            })
        }
        ClusterAlgorithm::Kmeans => parallel_map(&ks, |k| {
            let fit = kmeans(matrix, k, params.seed)?;
            silhouette_sampled(matrix, &fit.labels, metric, params.seed).map(|s| s.mean)
        }),
    }
}

fn parallel_map(
    ks: &[usize],
    f: impl Fn(usize) -> Result<f64> + Sync,
) -> Result<Vec<(usize, f64)>> {
    let workers = std::thread::available_parallelism()
        .map_or(1, |n| n.get())
        .min(ks.len());
    let chunk = ks.len().div_ceil(workers);
    let results: Vec<Result<Vec<(usize, f64)>>> = std::thread::scope(|scope| {
        let handles: Vec<_> = ks
            .chunks(chunk)
            .map(|part| {
                let f = &f;
                scope.spawn(move || {
                    part.iter()
                        .map(|&k| f(k).map(|s| (k, s)))
                        .collect::<Result<Vec<_>>>()
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("sweep worker panicked"))
            .collect()
    });
    let mut out = Vec::with_capacity(ks.len());
    for r in results {
        out.extend(r?);
    }
    out.sort_by_key(|&(k, _)| k);
    Ok(out)
}

/// [`cluster`] plus the silhouette curve over `k_range` (default range when
/// `None`; skipped when the matrix is too small for any sweep).
pub fn cluster_with_sweep(
    matrix: &MaterializedMatrix,
    params: &ClusteringParams,
    k_range: Option<RangeInclusive<usize>>,
) -> Result<ClusteringResult> {
    let mut result = cluster(matrix, params)?;
    if let Some(range) = k_range.or_else(|| default_k_range(matrix.n_rows())) {
        result.silhouette_by_k = silhouette_sweep(matrix, params, range)?;
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> MaterializedMatrix {
        MaterializedMatrix::from_rows(&[vec![0.0], vec![0.1], vec![10.0], vec![10.1]], false)
            .unwrap()
    }

    #[test]
    fn toy_kmeans_partition() {
        let r = cluster(&toy(), &ClusteringParams::kmeans(2, 0)).unwrap();
        assert_eq!(r.labels, vec![0, 0, 1, 1]);
        assert_eq!(r.cluster_sizes, vec![2, 2]);
        assert!((r.profile.means[0][0] - 0.05).abs() < 1e-12);
        assert!((r.profile.means[0][1] - 10.05).abs() < 1e-12);
        assert!((r.silhouette.mean - 0.990).abs() < 1e-3);
    }

    #[test]
    fn k_equal_n_gives_singletons() {
        for params in [
            ClusteringParams::kmeans(4, 3),
            ClusteringParams::agglomerative(4, Metric::Euclidean, Linkage::Average),
        ] {
            let r = cluster(&toy(), &params).unwrap();
            assert_eq!(r.labels, vec![0, 1, 2, 3]);
            if let Some(inertia) = r.inertia {
                assert_eq!(inertia, 0.0);
            }
        }
    }

    #[test]
    fn k_bounds() {
        assert!(cluster(&toy(), &ClusteringParams::kmeans(1, 0)).is_err());
        assert!(cluster(&toy(), &ClusteringParams::kmeans(5, 0)).is_err());
        assert!(cluster(
            &toy(),
            &ClusteringParams::agglomerative(1, Metric::Euclidean, Linkage::Single)
        )
        .is_err());
    }

    #[test]
    fn canonical_relabel() {
        assert_eq!(canonical_labels(&[2, 2, 0, 1, 0]), vec![0, 0, 1, 2, 1]);
    }

    #[test]
    fn sweep_single_k_matches_direct() {
        let rows: Vec<Vec<f64>> = (0..12)
            .map(|i| vec![(i % 4) as f64 * 3.0 + i as f64 * 0.01])
            .collect();
        let m = MaterializedMatrix::from_rows(&rows, false).unwrap();
        let p = ClusteringParams::kmeans(2, 5);
        let sweep = silhouette_sweep(&m, &p, 2..=2).unwrap();
        let direct = cluster(&m, &p).unwrap();
        assert_eq!(sweep, vec![(2, direct.silhouette.mean)]);
        assert!(silhouette_sweep(&m, &p, 2..=12).is_err());
        #[allow(clippy::reversed_empty_ranges)]
        let empty = 3..=2;
        assert!(silhouette_sweep(&m, &p, empty).is_err());
    }

    #[test]
    fn describe_text() {
        let p = ClusteringParams::agglomerative(4, Metric::Euclidean, Linkage::Average);
        assert_eq!(p.describe(), "agglomerative, k=4, euclidean");
        let p = ClusteringParams::agglomerative(3, Metric::Cosine, Linkage::Single);
        assert_eq!(p.describe(), "agglomerative, k=3, cosine, single linkage");
    }
}
