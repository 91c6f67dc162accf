//! Prolines: per-feature axes drawn in projection space.
//!
//! Each feature is swept from its minimum to its maximum while every other
//! feature is held at its median; the projected sweep is the axis polyline
//! and its arc length is the feature's relevance.

use serde::{Deserialize, Serialize};

use super::ProjectionResult;
use crate::data::FeatureId;
use crate::error::{Error, Result};
use crate::stats::FeatureSummary;

pub const DEFAULT_PROLINE_STEPS: usize = 11;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProlineAxis {
    pub feature_id: FeatureId,
    pub name: String,
    pub polyline: Vec<Vec<f64>>,
    /// Fractional polyline positions of min, q1, median, q3 and max.
    pub tick_positions: [f64; 5],
    pub tick_values: [f64; 5],
    pub relevance: f64,
    /// The feature is constant; the axis collapses to a point.
    pub zero_length: bool,
}

pub fn prolines(
    projection: &ProjectionResult,
    summaries: &[FeatureSummary],
    steps: usize,
) -> Result<Vec<ProlineAxis>> {
    if projection.components.is_none() {
        return Err(Error::Unsupported(format!(
            "prolines need a linear projection, not {}",
            projection.params.algorithm
        )));
    }
    if steps < 2 {
        return Err(Error::invalid("prolines need at least two steps"));
    }
    let centering = &projection.centering;
    let find = |feature: FeatureId| {
        summaries
            .iter()
            .find(|s| s.feature_id == feature)
            .ok_or_else(|| Error::invalid(format!("no summary for feature {feature}")))
    };
    let anchor: Vec<f64> = centering
        .feature_ids
        .iter()
        .map(|&f| find(f).map(|s| s.median))
        .collect::<Result<_>>()?;

    centering
        .feature_ids
        .iter()
        .enumerate()
        .map(|(j, &feature)| {
            let s = find(feature)?;
            let span = s.max - s.min;
            let zero_length = span == 0.0;
            let mut polyline = Vec::with_capacity(steps);
            let mut point = anchor.clone();
            for k in 0..steps {
                point[j] = s.min + span * k as f64 / (steps - 1) as f64;
                polyline.push(projection.map_point(&point)?);
            }
            let tick_values = [s.min, s.q1, s.median, s.q3, s.max];
            let tick_positions = tick_values.map(|v| {
                if zero_length {
                    0.0
                } else {
                    (v - s.min) / span * (steps - 1) as f64
                }
            });
            let relevance = polyline
                .windows(2)
                .map(|w| {
                    w[0].iter()
                        .zip(&w[1])
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum::<f64>()
                        .sqrt()
                })
                .sum();
            Ok(ProlineAxis {
                feature_id: feature,
                name: centering.feature_names.get(j).cloned().unwrap_or_default(),
                polyline,
                tick_positions,
                tick_values,
                relevance,
                zero_length,
            })
        })
        .collect()
}
