//! Forward projection (where does a perturbed point land?) and backward
//! projection (which minimal feature change reaches a target position?).
//! Both need a linear projection.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{ProjectionResult, RANK_TOLERANCE};
use crate::data::FeatureId;
use crate::error::{Error, Result};

/// Number of interpolation segments in an animation trajectory.
pub const TRAJECTORY_STEPS: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub from: Vec<f64>,
    pub to: Vec<f64>,
    /// `TRAJECTORY_STEPS + 1` evenly spaced points, `from` first and `to` last.
    pub points: Vec<Vec<f64>>,
}

impl Trajectory {
    fn between(from: Vec<f64>, to: Vec<f64>) -> Self {
        let points = (0..=TRAJECTORY_STEPS)
            .map(|s| {
                let t = s as f64 / TRAJECTORY_STEPS as f64;
                from.iter().zip(&to).map(|(a, b)| a + (b - a) * t).collect()
            })
            .collect();
        Self { from, to, points }
    }
}

fn require_linear(projection: &ProjectionResult) -> Result<&Vec<Vec<f64>>> {
    projection.components.as_ref().ok_or_else(|| {
        Error::Unsupported(format!(
            "what-if projection is only defined for pca, not {}",
            projection.params.algorithm
        ))
    })
}

/// Projects `point` before and after adding `perturbation` (source units).
pub fn forward_project(
    projection: &ProjectionResult,
    point: &[f64],
    perturbation: &[(FeatureId, f64)],
) -> Result<Trajectory> {
    require_linear(projection)?;
    let mut moved = point.to_vec();
    for &(feature, delta) in perturbation {
        let j = projection.centering.position_of(feature).ok_or_else(|| {
            Error::invalid(format!(
                "feature {feature} is not enabled in this projection"
            ))
        })?;
        if !delta.is_finite() {
            return Err(Error::invalid("perturbation must be finite"));
        }
        moved[j] += delta;
    }
    let from = projection.map_point(point)?;
    let to = projection.map_point(&moved)?;
    Ok(Trajectory::between(from, to))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackwardProjection {
    /// Feature change in source units, one entry per projected feature.
    pub delta: Vec<f64>,
    /// The same change in the projection's standardized units.
    pub delta_standardized: Vec<f64>,
    /// Where `point + delta` actually lands.
    pub achieved: Vec<f64>,
    /// `|achieved - target|`.
    pub residual: f64,
    pub feasible: bool,
    /// Rank of the loading submatrix over the free features.
    pub rank: usize,
    /// Animation from the current position to `achieved`.
    pub trajectory: Trajectory,
}

/// Minimum-norm change (in standardized units, over the non-frozen
/// features) moving `point` to `target`. When the target is unreachable the
/// least-squares change is returned with its residual and `feasible = false`.
pub fn backward_project(
    projection: &ProjectionResult,
    point: &[f64],
    target: &[f64],
    frozen: &[FeatureId],
) -> Result<BackwardProjection> {
    let components = require_linear(projection)?;
    let dims = projection.dims();
    if target.len() != dims {
        return Err(Error::invalid(format!(
            "target has {} coordinates, expected {dims}",
            target.len()
        )));
    }
    if target.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("target must be finite"));
    }
    let f = projection.centering.feature_ids.len();
    let mut is_frozen = vec![false; f];
    for &feature in frozen {
        let j = projection.centering.position_of(feature).ok_or_else(|| {
            Error::invalid(format!(
                "frozen feature {feature} is not enabled in this projection"
            ))
        })?;
        is_frozen[j] = true;
    }
    let free: Vec<usize> = (0..f).filter(|&j| !is_frozen[j]).collect();
    if free.is_empty() {
        return Err(Error::invalid("every feature is frozen"));
    }

    let current = projection.map_point(point)?;
    let rhs: Vec<f64> = target.iter().zip(&current).map(|(t, c)| t - c).collect();

    let a = DMatrix::from_fn(dims, free.len(), |r, c| components[r][free[c]]);
    let svd = a.svd(true, true);
    let (u, v_t) = match (svd.u, svd.v_t) {
        (Some(u), Some(v_t)) => (u, v_t),
        _ => {
            return Err(Error::Degenerate(
                "singular value decomposition failed".into(),
            ))
        }
    };
    let s = &svd.singular_values;
    let s_max = s.iter().fold(0.0f64, |m, &v| m.max(v));
    let cutoff = RANK_TOLERANCE * s_max.max(f64::MIN_POSITIVE);
    // delta = V Σ⁺ Uᵀ rhs
    let mut free_delta = vec![0.0; free.len()];
    let mut rank = 0;
    for k in 0..s.len() {
        if s[k] <= cutoff {
            continue;
        }
        rank += 1;
        let coeff: f64 = (0..dims).map(|r| u[(r, k)] * rhs[r]).sum::<f64>() / s[k];
        for (c, d) in free_delta.iter_mut().enumerate() {
            *d += v_t[(k, c)] * coeff;
        }
    }

    let mut delta_standardized = vec![0.0; f];
    for (c, &j) in free.iter().enumerate() {
        delta_standardized[j] = free_delta[c];
    }
    let delta: Vec<f64> = delta_standardized
        .iter()
        .zip(&projection.centering.scales)
        .map(|(d, s)| d * s)
        .collect();
    let moved: Vec<f64> = point.iter().zip(&delta).map(|(x, d)| x + d).collect();
    let achieved = projection.map_point(&moved)?;
    let residual = achieved
        .iter()
        .zip(target)
        .map(|(a, t)| (a - t) * (a - t))
        .sum::<f64>()
        .sqrt();
    let scale = rhs.iter().map(|v| v * v).sum::<f64>().sqrt().max(1.0);
    Ok(BackwardProjection {
        feasible: residual <= 1e-9 * scale,
        trajectory: Trajectory::between(current, achieved.clone()),
        delta,
        delta_standardized,
        achieved,
        residual,
        rank,
    })
}
