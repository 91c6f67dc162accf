use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::cluster::ClusteringResult;
use crate::data::{CsvOptions, Dataset, FeatureId, FilterExpr, RowId};
use crate::error::{Error, Result};
use crate::reduce::ProjectionResult;

pub type SolutionId = u64;
pub type ViewId = u64;

/// Frame colors, handed out round-robin as solutions are created.
pub const PALETTE: [&str; 8] = [
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948", "#b07aa1", "#ff9da7",
];

pub const DEFAULT_SLOT_COUNT: usize = 15;

/// A row/feature subset of the dataset with its own analysis results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub id: SolutionId,
    pub color: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent: Option<SolutionId>,
    pub active_rows: BTreeSet<RowId>,
    /// Ascending numeric column ids.
    pub enabled_features: Vec<FeatureId>,
    pub standardize: bool,
    /// Filter that produced the current selection, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub filter: Option<FilterExpr>,
    pub selection: BTreeSet<RowId>,
    pub isolation_stack: Vec<BTreeSet<RowId>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clustering: Option<Arc<ClusteringResult>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub projection: Option<Arc<ProjectionResult>>,
    pub revision: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViewKind {
    Table,
    Projection,
    Clustering,
    Distribution,
    Correlation,
    FeatureSelection,
}

impl ViewKind {
    pub const ALL: [ViewKind; 6] = [
        ViewKind::Table,
        ViewKind::Projection,
        ViewKind::Clustering,
        ViewKind::Distribution,
        ViewKind::Correlation,
        ViewKind::FeatureSelection,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ViewKind::Table => "table",
            ViewKind::Projection => "projection",
            ViewKind::Clustering => "clustering",
            ViewKind::Distribution => "distribution",
            ViewKind::Correlation => "correlation",
            ViewKind::FeatureSelection => "feature_selection",
        }
    }
}

impl fmt::Display for ViewKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ViewKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace([' ', '-'], "_");
        ViewKind::ALL
            .into_iter()
            .find(|k| k.name() == norm)
            .ok_or_else(|| Error::invalid(format!("unknown view kind '{s}'")))
    }
}

/// A data view bound to one solution and shown on one or more screen slots.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ViewBinding {
    pub view_id: ViewId,
    pub kind: ViewKind,
    pub solution_id: SolutionId,
    /// Slot numbers in `1..=slot_count`, in display order.
    pub slots: Vec<usize>,
}

/// Authoritative session state. Cheap to clone: the dataset and analysis
/// results are shared.
#[derive(Debug, Clone)]
pub struct SessionState {
    pub(crate) dataset: Option<Arc<Dataset>>,
    pub(crate) csv_options: CsvOptions,
    pub(crate) solutions: BTreeMap<SolutionId, Solution>,
    pub(crate) views: BTreeMap<ViewId, ViewBinding>,
    pub(crate) slot_count: usize,
    pub(crate) next_solution_id: SolutionId,
    pub(crate) next_view_id: ViewId,
    pub(crate) colors_assigned: usize,
    /// Bumped by every accepted mutation.
    pub(crate) revision: u64,
    /// Bumped whenever the dataset gains a column.
    pub(crate) dataset_version: u64,
}

impl SessionState {
    pub fn new(dataset: Option<Dataset>, slot_count: usize) -> Result<Self> {
        if slot_count == 0 {
            return Err(Error::invalid("slot count must be positive"));
        }
        Ok(Self {
            dataset: dataset.map(Arc::new),
            csv_options: CsvOptions::default(),
            solutions: BTreeMap::new(),
            views: BTreeMap::new(),
            slot_count,
            next_solution_id: 0,
            next_view_id: 0,
            colors_assigned: 0,
            revision: 0,
            dataset_version: 0,
        })
    }

    /// Options the dataset was read with; recorded in snapshots and logs.
    pub fn with_csv_options(mut self, options: CsvOptions) -> Self {
        self.csv_options = options;
        self
    }

    pub fn dataset(&self) -> Option<&Dataset> {
        self.dataset.as_deref()
    }

    pub fn csv_options(&self) -> &CsvOptions {
        &self.csv_options
    }

    pub fn solutions(&self) -> impl Iterator<Item = &Solution> {
        self.solutions.values()
    }

    pub fn solution(&self, id: SolutionId) -> Option<&Solution> {
        self.solutions.get(&id)
    }

    pub fn views(&self) -> impl Iterator<Item = &ViewBinding> {
        self.views.values()
    }

    pub fn view(&self, id: ViewId) -> Option<&ViewBinding> {
        self.views.get(&id)
    }

    pub fn slot_count(&self) -> usize {
        self.slot_count
    }

    pub fn revision(&self) -> u64 {
        self.revision
    }

    /// Views bound to `solution`, ascending id.
    pub fn views_of(&self, solution: SolutionId) -> Vec<ViewId> {
        self.views
            .values()
            .filter(|v| v.solution_id == solution)
            .map(|v| v.view_id)
            .collect()
    }

    /// Slots used by any view other than `except`.
    pub(crate) fn occupied_slots(&self, except: Option<ViewId>) -> BTreeSet<usize> {
        self.views
            .values()
            .filter(|v| Some(v.view_id) != except)
            .flat_map(|v| v.slots.iter().copied())
            .collect()
    }
}
