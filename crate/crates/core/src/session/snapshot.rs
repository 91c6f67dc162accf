use std::collections::BTreeSet;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::events::{apply_event, Event};
use super::state::{SessionState, Solution, ViewBinding};
use crate::data::{engineer_feature, load_csv, ColumnKind, CsvOptions, Dataset};
use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivedColumn {
    pub name: String,
    pub expression: String,
}

/// A dataset by location and content hash, plus how to rebuild its
/// engineered columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetRef {
    /// Empty for in-memory datasets, which must be supplied on restore.
    pub path: String,
    pub sha256: String,
    #[serde(default)]
    pub csv_options: CsvOptions,
    #[serde(default)]
    pub derived: Vec<DerivedColumn>,
}

impl DatasetRef {
    fn of(dataset: &Dataset, csv_options: &CsvOptions) -> Self {
        Self {
            path: dataset.source().path.clone(),
            sha256: dataset.source().sha256.clone(),
            csv_options: csv_options.clone(),
            derived: dataset
                .derived_columns()
                .into_iter()
                .map(|(name, expression)| DerivedColumn { name, expression })
                .collect(),
        }
    }

    /// Loads the base file (or checks `supplied`), verifies the hash and
    /// re-derives engineered columns.
    pub fn resolve(&self, supplied: Option<Dataset>) -> Result<Dataset> {
        let base = match supplied {
            Some(d) => d,
            None if self.path.is_empty() => {
                return Err(Error::Unsupported(
                    "the reference names an in-memory dataset; supply it explicitly".into(),
                ))
            }
            None => load_csv(&self.path, &self.csv_options)?,
        };
        if base.source().sha256 != self.sha256 {
            return Err(Error::HashMismatch {
                path: self.path.clone(),
                expected: self.sha256.clone(),
                found: base.source().sha256.clone(),
            });
        }
        let base_derived = base.derived_columns().len();
        let mut dataset = base;
        for d in self.derived.iter().skip(base_derived) {
            dataset = engineer_feature(&dataset, &d.name, &d.expression)?.dataset;
        }
        Ok(dataset)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotDocument {
    pub schema_version: u32,
    pub dataset: Option<DatasetRef>,
    pub slot_count: usize,
    pub revision: u64,
    pub dataset_version: u64,
    pub next_solution_id: u64,
    pub next_view_id: u64,
    pub colors_assigned: usize,
    pub solutions: Vec<Solution>,
    pub views: Vec<ViewBinding>,
}

pub fn snapshot(state: &SessionState) -> SnapshotDocument {
    SnapshotDocument {
        schema_version: SCHEMA_VERSION,
        dataset: state
            .dataset()
            .map(|d| DatasetRef::of(d, state.csv_options())),
        slot_count: state.slot_count,
        revision: state.revision,
        dataset_version: state.dataset_version,
        next_solution_id: state.next_solution_id,
        next_view_id: state.next_view_id,
        colors_assigned: state.colors_assigned,
        solutions: state.solutions().cloned().collect(),
        views: state.views().cloned().collect(),
    }
}

/// Rebuilds a session, reading the dataset from the referenced path.
pub fn restore(doc: &SnapshotDocument) -> Result<SessionState> {
    restore_inner(doc, None)
}

/// Rebuilds a session around an already loaded base dataset.
pub fn restore_with(doc: &SnapshotDocument, dataset: Dataset) -> Result<SessionState> {
    restore_inner(doc, Some(dataset))
}

fn check_schema(found: u32) -> Result<()> {
    if found != SCHEMA_VERSION {
        return Err(Error::SchemaVersion {
            expected: SCHEMA_VERSION,
            found,
        });
    }
    Ok(())
}

fn restore_inner(doc: &SnapshotDocument, supplied: Option<Dataset>) -> Result<SessionState> {
    check_schema(doc.schema_version)?;
    let dataset = match &doc.dataset {
        Some(r) => Some(r.resolve(supplied)?),
        None => None,
    };
    if dataset.is_none() && !doc.solutions.is_empty() {
        return Err(Error::invalid("snapshot has solutions but no dataset"));
    }
    let mut state = SessionState::new(dataset, doc.slot_count)?;
    if let Some(r) = &doc.dataset {
        state.csv_options = r.csv_options.clone();
    }
    state.revision = doc.revision;
    state.dataset_version = doc.dataset_version;
    state.next_solution_id = doc.next_solution_id;
    state.next_view_id = doc.next_view_id;
    state.colors_assigned = doc.colors_assigned;
    state.solutions = doc.solutions.iter().map(|s| (s.id, s.clone())).collect();
    state.views = doc.views.iter().map(|v| (v.view_id, v.clone())).collect();
    validate(&state)?;
    Ok(state)
}

fn validate(state: &SessionState) -> Result<()> {
    if let Some(ds) = state.dataset() {
        for s in state.solutions() {
            if s.id >= state.next_solution_id {
                return Err(Error::invalid(format!(
                    "solution id {} is not below the id counter",
                    s.id
                )));
            }
            if s.active_rows.is_empty() || s.active_rows.iter().any(|&r| r >= ds.n_rows()) {
                return Err(Error::invalid(format!(
                    "solution {} has invalid active rows",
                    s.id
                )));
            }
            if !s.selection.is_subset(&s.active_rows) {
                return Err(Error::invalid(format!(
                    "solution {} selects inactive rows",
                    s.id
                )));
            }
            if s.enabled_features
                .iter()
                .any(|&f| f >= ds.n_cols() || ds.column(f).kind() != ColumnKind::Numeric)
            {
                return Err(Error::invalid(format!(
                    "solution {} enables an invalid feature",
                    s.id
                )));
            }
        }
    }
    let mut used = BTreeSet::new();
    for v in state.views() {
        if v.view_id >= state.next_view_id {
            return Err(Error::invalid(format!(
                "view id {} is not below the id counter",
                v.view_id
            )));
        }
        if state.solution(v.solution_id).is_none() {
            return Err(Error::invalid(format!(
                "view {} is bound to a missing solution",
                v.view_id
            )));
        }
        for &slot in &v.slots {
            if slot == 0 || slot > state.slot_count || !used.insert(slot) {
                return Err(Error::invalid(format!(
                    "view {} has an invalid or shared slot {slot}",
                    v.view_id
                )));
            }
        }
    }
    Ok(())
}

/// Ordered record of accepted events against a base dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventLog {
    pub schema_version: u32,
    pub dataset: Option<DatasetRef>,
    pub slot_count: usize,
    pub events: Vec<Event>,
}

impl EventLog {
    /// An empty log starting from `state`, which must not have solutions yet.
    pub fn starting_at(state: &SessionState) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            dataset: state
                .dataset()
                .map(|d| DatasetRef::of(d, state.csv_options())),
            slot_count: state.slot_count,
            events: Vec::new(),
        }
    }
}

/// Re-applies every event of `log` from an empty session.
pub fn replay(log: &EventLog, dataset: Option<Dataset>) -> Result<SessionState> {
    check_schema(log.schema_version)?;
    let dataset = match &log.dataset {
        Some(r) => Some(r.resolve(dataset)?),
        None => None,
    };
    let mut state = SessionState::new(dataset, log.slot_count)?;
    if let Some(r) = &log.dataset {
        state.csv_options = r.csv_options.clone();
    }
    for (i, event) in log.events.iter().enumerate() {
        apply_event(&mut state, event.clone()).map_err(|r| {
            Error::invalid(format!(
                "event {i} ({}) rejected on replay: {r}",
                event.action.name()
            ))
        })?;
    }
    Ok(state)
}

pub fn write_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let path = path.as_ref();
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}
