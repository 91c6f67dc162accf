//! Classical multidimensional scaling.
//!
//! 1. pairwise distances D under the chosen metric
//! 2. B = -1/2 · J D² J with J the centering matrix
//! 3. top eigenpairs of B; coordinates = eigenvector · sqrt(max(λ, 0))

use nalgebra::{DMatrix, SymmetricEigen};

use super::{sign_fix, CancelToken, Centering, ProjectionParams, ProjectionResult};
use crate::error::{Error, Result};
use crate::metric::Metric;

/// Dense `n × n` eigendecomposition limit.
pub const MAX_CMDS_ROWS: usize = 4000;

pub(super) fn fit(
    z: &[f64],
    n: usize,
    f: usize,
    dims: usize,
    metric: Metric,
    cancel: &CancelToken,
) -> Result<ProjectionResult> {
    if n > MAX_CMDS_ROWS {
        return Err(Error::invalid(format!(
            "classical MDS is limited to {MAX_CMDS_ROWS} rows, got {n}; use pca or a subset"
        )));
    }
    let rows: Vec<&[f64]> = z.chunks(f).collect();
    metric.check_rows(rows.iter().copied())?;

    let mut b = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            let d = metric.distance(rows[i], rows[j]);
            b[(i, j)] = d * d;
            b[(j, i)] = d * d;
        }
    }
    cancel.check()?;

    let row_means: Vec<f64> = (0..n).map(|i| b.row(i).sum() / n as f64).collect();
    let grand = row_means.iter().sum::<f64>() / n as f64;
    for i in 0..n {
        for j in 0..n {
            b[(i, j)] = -0.5 * (b[(i, j)] - row_means[i] - row_means[j] + grand);
        }
    }
    cancel.check()?;

    let eig = SymmetricEigen::new(b);
    cancel.check()?;
    let values = eig.eigenvalues;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &c| values[c].total_cmp(&values[a]).then(a.cmp(&c)));

    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = 1e-8 * scale.max(1.0);
    let clamped = values.iter().any(|&v| v < -tol);

    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(dims);
    let mut eigenvalues = Vec::with_capacity(dims);
    for &k in order.iter().take(dims) {
        let lambda = values[k];
        let root = lambda.max(0.0).sqrt();
        let mut col: Vec<f64> = eig
            .eigenvectors
            .column(k)
            .iter()
            .map(|v| v * root)
            .collect();
        sign_fix(&mut col);
        columns.push(col);
        eigenvalues.push(lambda);
    }
    let coords = (0..n)
        .map(|i| columns.iter().map(|c| c[i]).collect())
        .collect();

    Ok(ProjectionResult {
        params: ProjectionParams::cmds(dims, metric),
        row_ids: Vec::new(),
        coords,
        components: None,
        explained_variance_ratio: None,
        eigenvalues: Some(eigenvalues),
        negative_eigenvalues_clamped: clamped,
        prolines: Vec::new(),
        centering: Centering::default(),
    })
}
