//! Dimensionality reduction to 2-D or 3-D, prolines, what-if projection and
//! the cluster-sorted distance heatmap.

mod heatmap;
mod mds;
mod pca;
mod prolines;
mod what_if;

use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use heatmap::{distance_matrix, DistanceMatrixView, DEFAULT_HEATMAP_CAP};
pub use mds::MAX_CMDS_ROWS;
pub use prolines::{prolines, ProlineAxis, DEFAULT_PROLINE_STEPS};
pub use what_if::{
    backward_project, forward_project, BackwardProjection, Trajectory, TRAJECTORY_STEPS,
};

use crate::data::{FeatureId, MaterializedMatrix, RowId};
use crate::error::{Error, Result};
use crate::metric::Metric;

/// Relative singular-value tolerance for rank decisions.
pub const RANK_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProjectionAlgorithm {
    Pca,
    Cmds,
}

impl ProjectionAlgorithm {
    pub fn name(self) -> &'static str {
        match self {
            ProjectionAlgorithm::Pca => "pca",
            ProjectionAlgorithm::Cmds => "cmds",
        }
    }
}

impl fmt::Display for ProjectionAlgorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProjectionAlgorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pca" => Ok(Self::Pca),
            "cmds" | "mds" => Ok(Self::Cmds),
            other => Err(Error::invalid(format!(
                "unknown projection algorithm '{other}'"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProjectionParams {
    pub algorithm: ProjectionAlgorithm,
    pub dims: usize,
    /// Only used by `cmds`.
    #[serde(default)]
    pub metric: Metric,
    #[serde(default = "default_true")]
    pub standardize: bool,
}

fn default_true() -> bool {
    true
}

impl ProjectionParams {
    pub fn pca(dims: usize) -> Self {
        Self {
            algorithm: ProjectionAlgorithm::Pca,
            dims,
            metric: Metric::Euclidean,
            standardize: true,
        }
    }

    pub fn cmds(dims: usize, metric: Metric) -> Self {
        Self {
            algorithm: ProjectionAlgorithm::Cmds,
            dims,
            metric,
            standardize: true,
        }
    }
}

/// The affine input transform applied before projecting:
/// `z = (x - mean) / scale`, with `scale == 1` for unscaled features.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Centering {
    pub feature_ids: Vec<FeatureId>,
    pub feature_names: Vec<String>,
    pub means: Vec<f64>,
    pub scales: Vec<f64>,
    pub zero_variance: Vec<bool>,
}

impl Centering {
    fn from_matrix(matrix: &MaterializedMatrix, standardize: bool) -> Self {
        let scales = (0..matrix.n_cols())
            .map(|j| {
                if standardize && !matrix.zero_variance[j] {
                    matrix.column_stds[j]
                } else {
                    1.0
                }
            })
            .collect();
        Self {
            feature_ids: matrix.feature_ids.clone(),
            feature_names: matrix.feature_names.clone(),
            means: matrix.column_means.clone(),
            scales,
            zero_variance: matrix.zero_variance.clone(),
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.means.iter().zip(&self.scales))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }

    pub fn position_of(&self, feature: FeatureId) -> Option<usize> {
        self.feature_ids.iter().position(|&f| f == feature)
    }

    /// Row-major transformed source values of `matrix`.
    fn transform(&self, matrix: &MaterializedMatrix) -> Vec<f64> {
        let f = matrix.n_cols();
        let mut out = matrix.raw().to_vec();
        for row in out.chunks_mut(f) {
            for ((v, m), sc) in row.iter_mut().zip(&self.means).zip(&self.scales) {
                *v = (*v - m) / sc;
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionResult {
    pub params: ProjectionParams,
    pub row_ids: Vec<RowId>,
    /// `n × dims` coordinates.
    pub coords: Vec<Vec<f64>>,
    /// `dims × f` unit loading vectors (pca).
    pub components: Option<Vec<Vec<f64>>>,
    pub explained_variance_ratio: Option<Vec<f64>>,
    /// Leading eigenvalues of the double-centered Gram matrix (cmds).
    pub eigenvalues: Option<Vec<f64>>,
    /// Set when cmds had to clamp negative eigenvalues to zero.
    pub negative_eigenvalues_clamped: bool,
    pub prolines: Vec<ProlineAxis>,
    pub centering: Centering,
}

impl ProjectionResult {
    pub fn dims(&self) -> usize {
        self.params.dims
    }

    /// Linear map of a source-unit feature vector into projection space (pca only).
    pub fn map_point(&self, point: &[f64]) -> Result<Vec<f64>> {
        let components = self.components.as_ref().ok_or_else(|| {
            Error::Unsupported(format!(
                "point mapping needs a linear projection, not {}",
                self.params.algorithm
            ))
        })?;
        if point.len() != self.centering.feature_ids.len() {
            return Err(Error::invalid(format!(
                "point has {} features, projection has {}",
                point.len(),
                self.centering.feature_ids.len()
            )));
        }
        let z = self.centering.apply(point);
        Ok(components
            .iter()
            .map(|c| c.iter().zip(&z).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// Keeps only the given dataset rows, leaving the fitted basis untouched.
    pub fn restrict_to_rows(&mut self, keep: &std::collections::BTreeSet<RowId>) {
        let (rows, coords): (Vec<_>, Vec<_>) = self
            .row_ids
            .iter()
            .zip(self.coords.drain(..))
            .filter(|(r, _)| keep.contains(r))
            .map(|(r, c)| (*r, c))
            .unzip();
        self.row_ids = rows;
        self.coords = coords;
    }
}

/// Cooperative cancellation flag, checked between matrix-scale phases.
#[derive(Debug, Clone, Default)]
pub struct CancelToken(Arc<AtomicBool>);

impl CancelToken {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn cancel(&self) {
        self.0.store(true, Ordering::Relaxed);
    }

    pub fn is_cancelled(&self) -> bool {
        self.0.load(Ordering::Relaxed)
    }

    pub(crate) fn check(&self) -> Result<()> {
        if self.is_cancelled() {
            Err(Error::Cancelled)
        } else {
            Ok(())
        }
    }
}

pub fn project(matrix: &MaterializedMatrix, params: &ProjectionParams) -> Result<ProjectionResult> {
    project_with_cancel(matrix, params, &CancelToken::new())
}

pub fn project_with_cancel(
    matrix: &MaterializedMatrix,
    params: &ProjectionParams,
    cancel: &CancelToken,
) -> Result<ProjectionResult> {
    let (n, f) = (matrix.n_rows(), matrix.n_cols());
    if !(2..=3).contains(&params.dims) {
        return Err(Error::invalid(format!(
            "dims must be 2 or 3, got {}",
            params.dims
        )));
    }
    if n < params.dims + 1 {
        return Err(Error::invalid(format!(
            "projection to {} dims needs at least {} rows, got {n}",
            params.dims,
            params.dims + 1
        )));
    }
    if f < params.dims {
        return Err(Error::invalid(format!(
            "dims {} exceeds the available rank ({f} features)",
            params.dims
        )));
    }
    if matrix.zero_variance.iter().all(|&z| z) {
        return Err(Error::Degenerate("every feature is constant".into()));
    }
    let centering = Centering::from_matrix(matrix, params.standardize);
    let z = centering.transform(matrix);
    cancel.check()?;
    let mut result = match params.algorithm {
        ProjectionAlgorithm::Pca => pca::fit(&z, n, f, params.dims, cancel)?,
        ProjectionAlgorithm::Cmds => mds::fit(&z, n, f, params.dims, params.metric, cancel)?,
    };
    result.params = *params;
    result.row_ids = matrix.row_ids.clone();
    result.centering = centering;
    Ok(result)
}

/// Deterministic sign convention: the largest-magnitude entry (first on
/// ties) is made positive.
pub(crate) fn sign_fix(v: &mut [f64]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v[best] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn collinear_points_put_all_variance_on_first_axis() {
        let rows: Vec<Vec<f64>> = (0..4).map(|i| vec![i as f64, 0.0]).collect();
        let m = MaterializedMatrix::from_rows(&rows, false).unwrap();
        let mut p = ProjectionParams::pca(2);
        p.standardize = false;
        let r = project(&m, &p).unwrap();
        let evr = r.explained_variance_ratio.unwrap();
        assert!((evr[0] - 1.0).abs() < 1e-12);
        assert!(evr[1].abs() < 1e-12);
    }

    #[test]
    fn precondition_errors() {
        let rows: Vec<Vec<f64>> = (0..3).map(|i| vec![i as f64, (i * i) as f64]).collect();
        let m = MaterializedMatrix::from_rows(&rows, false).unwrap();
        assert!(project(&m, &ProjectionParams::pca(3)).is_err());
        assert!(project(&m, &ProjectionParams::pca(4)).is_err());
        let one_feature =
            MaterializedMatrix::from_rows(&[vec![1.0], vec![2.0], vec![4.0]], false).unwrap();
        assert!(project(&one_feature, &ProjectionParams::pca(2)).is_err());
        let constant = MaterializedMatrix::from_rows(&vec![vec![1.0, 2.0]; 5], false).unwrap();
        assert!(matches!(
            project(&constant, &ProjectionParams::pca(2)),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn cancellation_is_observed() {
        let rows: Vec<Vec<f64>> = (0..10)
            .map(|i| vec![i as f64, (i % 3) as f64, 1.0])
            .collect();
        let m = MaterializedMatrix::from_rows(&rows, false).unwrap();
        let token = CancelToken::new();
        token.cancel();
        assert!(matches!(
            project_with_cancel(&m, &ProjectionParams::pca(2), &token),
            Err(Error::Cancelled)
        ));
    }

    #[test]
    fn sign_fix_makes_largest_entry_positive() {
        let mut v = [0.1, -0.9, 0.3];
        sign_fix(&mut v);
        assert_eq!(v, [-0.1, 0.9, -0.3]);
    }
}
