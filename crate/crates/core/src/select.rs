//! Feature ranking and automatic feature selection.
//!
//! Unsupervised methods: `variance`, `pca_loading` and `agglomerate`
//! (features grouped by `1 - |r|` under average linkage). Supervised
//! methods reuse the per-feature ANOVA / chi-squared statistics against a
//! clustering's labels.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cluster::{agglomerative_merge_condensed, cut_dendrogram, Linkage, Merge};
use crate::data::{FeatureId, MaterializedMatrix};
use crate::error::{Error, Result};
use crate::reduce::{project, ProjectionParams};
use crate::stats::{correlations, significance, SignificanceMethod};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RankingMethod {
    Variance,
    PcaLoading,
    Agglomerate,
    Anova,
    Chi2,
}

impl RankingMethod {
    pub const ALL: [RankingMethod; 5] = [
        RankingMethod::Variance,
        RankingMethod::PcaLoading,
        RankingMethod::Agglomerate,
        RankingMethod::Anova,
        RankingMethod::Chi2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RankingMethod::Variance => "variance",
            RankingMethod::PcaLoading => "pca_loading",
            RankingMethod::Agglomerate => "agglomerate",
            RankingMethod::Anova => "anova",
            RankingMethod::Chi2 => "chi2",
        }
    }

    pub fn needs_labels(self) -> bool {
        matches!(self, RankingMethod::Anova | RankingMethod::Chi2)
    }
}

impl fmt::Display for RankingMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RankingMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        RankingMethod::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::invalid(format!("unknown ranking method '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingEntry {
    pub feature_id: FeatureId,
    pub name: String,
    pub score: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_value: Option<f64>,
    /// Feature group (agglomerate only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<usize>,
}

/// Feature-space dendrogram kept so selection can regroup for any `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureDendrogram {
    pub feature_ids: Vec<FeatureId>,
    pub variances: Vec<f64>,
    pub merges: Vec<Merge>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRanking {
    pub method: RankingMethod,
    /// Descending score, ties by feature id ascending.
    pub entries: Vec<RankingEntry>,
    pub top_n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dendrogram: Option<FeatureDendrogram>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankOptions {
    /// Group count for `agglomerate`, default selection size otherwise.
    pub top_n: usize,
    /// Components considered by `pca_loading`.
    pub dims: usize,
}

impl Default for RankOptions {
    fn default() -> Self {
        Self { top_n: 5, dims: 2 }
    }
}

fn sample_variance(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64
}

pub fn rank_features(
    matrix: &MaterializedMatrix,
    method: RankingMethod,
    labels: Option<&[usize]>,
    options: RankOptions,
) -> Result<FeatureRanking> {
    let f = matrix.n_cols();
    if f < 2 {
        return Err(Error::invalid("ranking needs at least two features"));
    }
    match (method.needs_labels(), labels.is_some()) {
        (true, false) => {
            return Err(Error::invalid(format!(
                "{method} ranking needs cluster labels"
            )))
        }
        (false, true) => return Err(Error::invalid(format!("{method} ranking takes no labels"))),
        _ => {}
    }
    let top_n = options.top_n.clamp(1, f);
    let variances: Vec<f64> = (0..f)
        .map(|j| sample_variance(&matrix.raw_column(j)))
        .collect();
    let entry = |j: usize, score: f64| RankingEntry {
        feature_id: matrix.feature_ids[j],
        name: matrix.feature_names[j].clone(),
        score,
        p_value: None,
        group: None,
    };

    let mut dendrogram = None;
    let mut entries: Vec<RankingEntry> = match method {
        RankingMethod::Variance => (0..f).map(|j| entry(j, variances[j])).collect(),
        RankingMethod::PcaLoading => {
            let mut params = ProjectionParams::pca(options.dims);
            params.standardize = matrix.standardized;
            let proj = project(matrix, &params)?;
            let components = proj.components.expect("pca yields components");
            (0..f)
                .map(|j| entry(j, components.iter().map(|c| c[j] * c[j]).sum()))
                .collect()
        }
        RankingMethod::Agglomerate => {
            let r = correlations(matrix, 0)?.matrix;
            let mut d = Vec::with_capacity(f * (f - 1) / 2);
            for (a, row) in r.iter().enumerate() {
                d.extend(row[a + 1..].iter().map(|v| 1.0 - v.abs()));
            }
            let merges = agglomerative_merge_condensed(f, d, Linkage::Average);
            let groups = cut_dendrogram(f, &merges, top_n);
            let ranks = variance_ranks(&groups, &variances);
            dendrogram = Some(FeatureDendrogram {
                feature_ids: matrix.feature_ids.clone(),
                variances: variances.clone(),
                merges,
            });
            (0..f)
                .map(|j| RankingEntry {
                    group: Some(groups[j]),
                    ..entry(j, -(ranks[j] as f64))
                })
                .collect()
        }
        RankingMethod::Anova | RankingMethod::Chi2 => {
            let sig_method = if method == RankingMethod::Anova {
                SignificanceMethod::Anova
            } else {
                SignificanceMethod::Chi2
            };
            let sig = significance(matrix, labels.unwrap(), sig_method)?;
            sig.features
                .iter()
                .enumerate()
                .map(|(j, s)| RankingEntry {
                    p_value: Some(s.p_value),
                    ..entry(j, s.statistic)
                })
                .collect()
        }
    };
    entries.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then(a.feature_id.cmp(&b.feature_id))
    });
    Ok(FeatureRanking {
        method,
        entries,
        top_n,
        dendrogram,
    })
}

/// Rank of each feature's variance within its group: 0 for the largest,
/// lowest feature position first on ties.
fn variance_ranks(groups: &[usize], variances: &[f64]) -> Vec<usize> {
    (0..groups.len())
        .map(|j| {
            (0..groups.len())
                .filter(|&o| groups[o] == groups[j])
                .filter(|&o| variances[o] > variances[j] || (variances[o] == variances[j] && o < j))
                .count()
        })
        .collect()
}

/// The `n` most relevant features. For `agglomerate` the features are
/// regrouped into `n` groups and the highest-variance member of each is kept.
pub fn auto_select(ranking: &FeatureRanking, n: usize) -> Result<BTreeSet<FeatureId>> {
    let total = ranking.entries.len();
    if n == 0 || n > total {
        return Err(Error::invalid(format!(
            "selection size must be within 1..={total}, got {n}"
        )));
    }
    if let Some(tree) = &ranking.dendrogram {
        let groups = cut_dendrogram(tree.feature_ids.len(), &tree.merges, n);
        let ranks = variance_ranks(&groups, &tree.variances);
        return Ok((0..groups.len())
            .filter(|&j| ranks[j] == 0)
            .map(|j| tree.feature_ids[j])
            .collect());
    }
    Ok(ranking
        .entries
        .iter()
        .take(n)
        .map(|e| e.feature_id)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn three_features() -> MaterializedMatrix {
        // sample variances 0, 1 and 5
        let wave: Vec<f64> = (0..6).map(|i| (i as f64 * 1.3).sin()).collect();
        let scale = (5.0 / sample_variance(&wave)).sqrt();
        let rows: Vec<Vec<f64>> = (0..6)
            .map(|i| vec![2.0, i as f64 / 3.5f64.sqrt(), wave[i] * scale])
            .collect();
        MaterializedMatrix::from_rows(&rows, false).unwrap()
    }

    #[test]
    fn variance_ordering() {
        let m = three_features();
        let r = rank_features(&m, RankingMethod::Variance, None, RankOptions::default()).unwrap();
        let order: Vec<_> = r.entries.iter().map(|e| e.feature_id).collect();
        assert_eq!(order, vec![2, 1, 0]);
        assert!((r.entries[0].score - 5.0).abs() < 1e-9);
        assert!((r.entries[1].score - 1.0).abs() < 1e-9);
        assert_eq!(auto_select(&r, 1).unwrap(), BTreeSet::from([2]));
        assert_eq!(auto_select(&r, 3).unwrap(), BTreeSet::from([0, 1, 2]));
        assert!(auto_select(&r, 0).is_err());
        assert!(auto_select(&r, 4).is_err());
    }

    #[test]
    fn agglomerate_keeps_one_of_a_duplicated_pair() {
        let rows: Vec<Vec<f64>> = (0..10)
            .map(|i| {
                let t = i as f64;
                vec![t, 2.0 * t + 1.0, (t * 2.1).sin()]
            })
            .collect();
        let m = MaterializedMatrix::from_rows(&rows, false).unwrap();
        let r = rank_features(
            &m,
            RankingMethod::Agglomerate,
            None,
            RankOptions { top_n: 2, dims: 2 },
        )
        .unwrap();
        let group = |f: usize| r.entries.iter().find(|e| e.feature_id == f).unwrap().group;
        assert_eq!(group(0), group(1));
        let picked = auto_select(&r, 2).unwrap();
        assert!(!(picked.contains(&0) && picked.contains(&1)));
        assert!(picked.contains(&2));
    }

    #[test]
    fn label_requirements() {
        let m = three_features();
        let labels = [0, 0, 0, 1, 1, 1];
        assert!(rank_features(&m, RankingMethod::Anova, None, RankOptions::default()).is_err());
        assert!(rank_features(
            &m,
            RankingMethod::Variance,
            Some(&labels),
            RankOptions::default()
        )
        .is_err());
        let r = rank_features(
            &m,
            RankingMethod::Anova,
            Some(&labels),
            RankOptions::default(),
        )
        .unwrap();
        assert!(r
            .entries
            .iter()
            .all(|e| e.p_value.is_some() && e.score.is_finite()));
        let one = MaterializedMatrix::from_rows(&[vec![1.0], vec![2.0]], false).unwrap();
        assert!(
            rank_features(&one, RankingMethod::Variance, None, RankOptions::default()).is_err()
        );
    }

    #[test]
    fn pca_loading_scores_sum_to_dims() {
        let rows: Vec<Vec<f64>> = (0..9)
            .map(|i| vec![i as f64, ((i * 7) % 5) as f64, (i * i) as f64])
            .collect();
        let m = MaterializedMatrix::from_rows(&rows, true).unwrap();
        let r = rank_features(&m, RankingMethod::PcaLoading, None, RankOptions::default()).unwrap();
        let total: f64 = r.entries.iter().map(|e| e.score).sum();
        assert!((total - 2.0).abs() < 1e-9);
    }
}
