use serde::{Deserialize, Serialize};

use super::state::{SessionState, Solution, SolutionId, ViewId, ViewKind};

/// Most points kept in a solution thumbnail.
pub const THUMBNAIL_POINTS: usize = 256;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionOverview {
    pub solution_id: SolutionId,
    pub color: String,
    pub revision: u64,
    pub n_rows: usize,
    pub n_features: usize,
    /// Evenly strided subset of the projection coordinates.
    pub thumbnail: Option<Vec<Vec<f64>>>,
    /// Cluster label of each thumbnail point, when clustered.
    pub thumbnail_labels: Option<Vec<usize>>,
    /// Normalized features × clusters profile.
    pub profile: Option<Vec<Vec<f64>>>,
    pub algorithm: Option<String>,
    /// Absent (not zero) when the solution is not clustered.
    pub silhouette_mean: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RingEntry {
    pub view_id: ViewId,
    pub kind: ViewKind,
    pub solution_id: SolutionId,
    pub color: String,
    pub slots: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TableOverview {
    pub solutions: Vec<SolutionOverview>,
    /// Every bound view once, ordered by first slot.
    pub ring: Vec<RingEntry>,
}

fn solution_overview(s: &Solution) -> SolutionOverview {
    let stride = |n: usize| n.div_ceil(THUMBNAIL_POINTS).max(1);
    let thumbnail = s.projection.as_ref().map(|p| {
        p.coords
            .iter()
            .step_by(stride(p.coords.len()))
            .cloned()
            .collect()
    });
    // labels are aligned with the projection only when both cover the same rows
    let thumbnail_labels = match (&s.projection, &s.clustering) {
        (Some(p), Some(c)) if p.row_ids == c.row_ids => Some(
            c.labels
                .iter()
                .step_by(stride(c.labels.len()))
                .copied()
                .collect(),
        ),
        _ => None,
    };
    SolutionOverview {
        solution_id: s.id,
        color: s.color.clone(),
        revision: s.revision,
        n_rows: s.active_rows.len(),
        n_features: s.enabled_features.len(),
        thumbnail,
        thumbnail_labels,
        profile: s.clustering.as_ref().map(|c| c.profile.normalized.clone()),
        algorithm: s.clustering.as_ref().map(|c| c.params.describe()),
        silhouette_mean: s.clustering.as_ref().map(|c| c.silhouette.mean),
    }
}

/// Compact summary of every solution plus the view ring; a pure function of
/// the state.
pub fn overview(state: &SessionState) -> TableOverview {
    let mut ring: Vec<RingEntry> = state
        .views()
        .map(|v| RingEntry {
            view_id: v.view_id,
            kind: v.kind,
            solution_id: v.solution_id,
            color: state
                .solution(v.solution_id)
                .map(|s| s.color.clone())
                .unwrap_or_default(),
            slots: v.slots.clone(),
        })
        .collect();
    ring.sort_by_key(|e| (e.slots.first().copied().unwrap_or(usize::MAX), e.view_id));
    TableOverview {
        solutions: state.solutions().map(solution_overview).collect(),
        ring,
    }
}
