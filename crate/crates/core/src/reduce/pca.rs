use nalgebra::DMatrix;

use super::{sign_fix, CancelToken, Centering, ProjectionParams, ProjectionResult};
use crate::error::{Error, Result};

/// PCA on an already centered (and possibly scaled) row-major matrix.
///
/// Components are the leading right singular vectors, sign-fixed; the
/// coordinates are the data times the transposed components.
pub(super) fn fit(
    z: &[f64],
    n: usize,
    f: usize,
    dims: usize,
    cancel: &CancelToken,
) -> Result<ProjectionResult> {
    let x = DMatrix::from_row_slice(n, f, z);
    let svd = x.svd(false, true);
    cancel.check()?;
    let v_t = svd
        .v_t
        .ok_or_else(|| Error::Degenerate("singular value decomposition failed".into()))?;
    let singular = svd.singular_values;
    let mut order: Vec<usize> = (0..singular.len()).collect();
    order.sort_by(|&a, &b| singular[b].total_cmp(&singular[a]).then(a.cmp(&b)));
    if order.len() < dims {
        return Err(Error::invalid(format!(
            "dims {dims} exceeds the available rank {}",
            order.len()
        )));
    }
    let total: f64 = singular.iter().map(|s| s * s).sum();
    if total == 0.0 {
        return Err(Error::Degenerate("data has no variance".into()));
    }

    let mut components = Vec::with_capacity(dims);
    let mut ratios = Vec::with_capacity(dims);
    for &k in order.iter().take(dims) {
        let mut c: Vec<f64> = v_t.row(k).iter().copied().collect();
        sign_fix(&mut c);
        components.push(c);
        ratios.push((singular[k] * singular[k] / total).clamp(0.0, 1.0));
    }
    cancel.check()?;

    let coords = (0..n)
        .map(|i| {
            let row = &z[i * f..(i + 1) * f];
            components
                .iter()
                .map(|c| c.iter().zip(row).map(|(a, b)| a * b).sum())
                .collect()
        })
        .collect();

    Ok(ProjectionResult {
        params: ProjectionParams::pca(dims),
        row_ids: Vec::new(),
        coords,
        components: Some(components),
        explained_variance_ratio: Some(ratios),
        eigenvalues: None,
        negative_eigenvalues_clamped: false,
        prolines: Vec::new(),
        centering: Centering::default(),
    })
}
