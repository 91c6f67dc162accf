//! Per-feature association between a feature and a row labelling:
//! one-way ANOVA or a chi-squared score on shifted feature sums.
//!
//! Both tests use source-unit values. For chi-squared each feature is
//! shifted by its minimum so values are non-negative; per-cluster sums are
//! the observed counts and the expected counts are proportional to cluster
//! size.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::special::{chi2_sf, f_sf};
use crate::data::{FeatureId, MaterializedMatrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignificanceMethod {
    Anova,
    Chi2,
}

impl fmt::Display for SignificanceMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SignificanceMethod::Anova => "anova",
            SignificanceMethod::Chi2 => "chi2",
        })
    }
}

impl FromStr for SignificanceMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "anova" => Ok(Self::Anova),
            "chi2" | "chi-squared" | "chi_squared" => Ok(Self::Chi2),
            other => Err(Error::invalid(format!(
                "unknown significance method '{other}'"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSignificance {
    pub feature_id: FeatureId,
    /// F for ANOVA, chi-squared otherwise. Saturates at `f64::MAX` when the
    /// within-group scatter is zero but groups differ.
    pub statistic: f64,
    pub p_value: f64,
    /// Eta squared for ANOVA, Cramér's V for chi-squared.
    pub effect_size: f64,
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignificanceResult {
    pub method: SignificanceMethod,
    pub n_groups: usize,
    pub features: Vec<FeatureSignificance>,
}

/// Rows grouped by label, groups in ascending label order.
fn group_positions(labels: &[usize]) -> Vec<Vec<usize>> {
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &l) in labels.iter().enumerate() {
        groups.entry(l).or_default().push(i);
    }
    groups.into_values().collect()
}

/// One-way ANOVA sums of squares: `(ssb, ssw, sst)`.
pub fn anova_sums(values: &[f64], groups: &[Vec<usize>]) -> (f64, f64, f64) {
    let n = values.len() as f64;
    let grand = values.iter().sum::<f64>() / n;
    let mut ssb = 0.0;
    let mut ssw = 0.0;
    for g in groups {
        let m = g.iter().map(|&i| values[i]).sum::<f64>() / g.len() as f64;
        ssb += g.len() as f64 * (m - grand) * (m - grand);
        ssw += g
            .iter()
            .map(|&i| (values[i] - m) * (values[i] - m))
            .sum::<f64>();
    }
    let sst = values
        .iter()
        .map(|v| (v - grand) * (v - grand))
        .sum::<f64>();
    (ssb, ssw, sst)
}

fn anova(feature_id: FeatureId, values: &[f64], groups: &[Vec<usize>]) -> FeatureSignificance {
    let n = values.len() as f64;
    let k = groups.len() as f64;
    let (ssb, ssw, sst) = anova_sums(values, groups);
    let effect_size = if sst > 0.0 {
        (ssb / sst).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let (statistic, p_value, degenerate) = if ssw == 0.0 {
        if ssb > 0.0 {
            (f64::MAX, 0.0, true)
        } else {
            (0.0, 1.0, true)
        }
    } else {
        let f = (ssb / (k - 1.0)) / (ssw / (n - k));
        (f, f_sf(f, k - 1.0, n - k), false)
    };
    FeatureSignificance {
        feature_id,
        statistic,
        p_value,
        effect_size,
        degenerate,
    }
}

fn chi2(feature_id: FeatureId, values: &[f64], groups: &[Vec<usize>]) -> FeatureSignificance {
    let n = values.len() as f64;
    let k = groups.len() as f64;
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let total: f64 = values.iter().map(|v| v - min).sum();
    if total <= 0.0 {
        return FeatureSignificance {
            feature_id,
            statistic: 0.0,
            p_value: 1.0,
            effect_size: 0.0,
            degenerate: true,
        };
    }
    let statistic: f64 = groups
        .iter()
        .map(|g| {
            let observed: f64 = g.iter().map(|&i| values[i] - min).sum();
            let expected = total * g.len() as f64 / n;
            (observed - expected) * (observed - expected) / expected
        })
        .sum();
    FeatureSignificance {
        feature_id,
        statistic,
        p_value: chi2_sf(statistic, k - 1.0),
        effect_size: (statistic / (total * (k - 1.0))).sqrt().min(1.0),
        degenerate: false,
    }
}

pub fn significance(
    matrix: &MaterializedMatrix,
    labels: &[usize],
    method: SignificanceMethod,
) -> Result<SignificanceResult> {
    if labels.len() != matrix.n_rows() {
        return Err(Error::invalid(format!(
            "{} labels for {} rows",
            labels.len(),
            matrix.n_rows()
        )));
    }
    let groups = group_positions(labels);
    if groups.len() < 2 {
        return Err(Error::invalid("significance needs at least two clusters"));
    }
    if matrix.n_rows() <= groups.len() {
        return Err(Error::invalid(format!(
            "significance needs more rows ({}) than clusters ({})",
            matrix.n_rows(),
            groups.len()
        )));
    }
    let features = (0..matrix.n_cols())
        .map(|j| {
            let values = matrix.raw_column(j);
            let id = matrix.feature_ids[j];
            match method {
                SignificanceMethod::Anova => anova(id, &values, &groups),
                SignificanceMethod::Chi2 => chi2(id, &values, &groups),
            }
        })
        .collect();
    Ok(SignificanceResult {
        method,
        n_groups: groups.len(),
        features,
    })
}
