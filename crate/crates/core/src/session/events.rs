//! Event application in two phases.
//!
//! [`prepare`] validates an event and does the expensive work (clustering,
//! projection, filtering) against an immutable state; [`commit`] re-checks
//! the revisions the work was based on and installs it. A prepared result
//! whose basis moved in the meantime is rejected as a conflict.
//! [`apply_event`] runs both back to back.

use std::collections::BTreeSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::state::{SessionState, Solution, SolutionId, ViewBinding, ViewId, ViewKind, PALETTE};
use crate::cluster::{cluster_with_sweep, ClusteringParams};
use crate::data::{
    apply_filter, engineer_feature, materialize, parse_filter, ColumnMeta, Dataset, FeatureId,
    FilterExpr, MaterializedMatrix, RowId,
};
use crate::reduce::{
    backward_project, forward_project, project, prolines, BackwardProjection, ProjectionParams,
    ProjectionResult, Trajectory, DEFAULT_PROLINE_STEPS,
};
use crate::stats::{summarize, DEFAULT_BINS};

/// Filter as typed text or as a tree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FilterInput {
    Text(String),
    Expr(FilterExpr),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Perturbation {
    pub feature: FeatureId,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "payload", rename_all = "snake_case")]
pub enum Action {
    CreateSolution {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        parent: Option<SolutionId>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        rows: Option<Vec<RowId>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        features: Option<Vec<FeatureId>>,
    },
    /// Selects the active rows matching the filter; `None` clears the selection.
    SetFilter {
        filter: Option<FilterInput>,
    },
    Isolate {},
    UndoIsolate {},
    Reproject {},
    EnableFeatures {
        features: Vec<FeatureId>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        standardize: Option<bool>,
    },
    EngineerFeature {
        name: String,
        expression: String,
    },
    ApplyClustering(ClusteringParams),
    ApplyProjection(ProjectionParams),
    SelectPoints {
        rows: Vec<RowId>,
    },
    ForwardProject {
        row: RowId,
        perturbation: Vec<Perturbation>,
    },
    BackwardProject {
        row: RowId,
        target: Vec<f64>,
        #[serde(default)]
        frozen: Vec<FeatureId>,
    },
    BindView {
        kind: ViewKind,
        slots: Vec<usize>,
    },
    MoveView {
        view_id: ViewId,
        slots: Vec<usize>,
    },
    /// Grows a view to `screens` slots in total.
    ExtendView {
        view_id: ViewId,
        screens: usize,
    },
    ClearView {
        view_id: ViewId,
    },
    Snapshot {},
}

impl Action {
    pub fn name(&self) -> &'static str {
        match self {
            Action::CreateSolution { .. } => "create_solution",
            Action::SetFilter { .. } => "set_filter",
            Action::Isolate {} => "isolate",
            Action::UndoIsolate {} => "undo_isolate",
            Action::Reproject {} => "reproject",
            Action::EnableFeatures { .. } => "enable_features",
            Action::EngineerFeature { .. } => "engineer_feature",
            Action::ApplyClustering(_) => "apply_clustering",
            Action::ApplyProjection(_) => "apply_projection",
            Action::SelectPoints { .. } => "select_points",
            Action::ForwardProject { .. } => "forward_project",
            Action::BackwardProject { .. } => "backward_project",
            Action::BindView { .. } => "bind_view",
            Action::MoveView { .. } => "move_view",
            Action::ExtendView { .. } => "extend_view",
            Action::ClearView { .. } => "clear_view",
            Action::Snapshot {} => "snapshot",
        }
    }

    /// Mutates a solution, so it needs `solution_id` and `expected_revision`.
    pub fn mutates_solution(&self) -> bool {
        matches!(
            self,
            Action::SetFilter { .. }
                | Action::Isolate {}
                | Action::UndoIsolate {}
                | Action::Reproject {}
                | Action::EnableFeatures { .. }
                | Action::EngineerFeature { .. }
                | Action::ApplyClustering(_)
                | Action::ApplyProjection(_)
                | Action::SelectPoints { .. }
        )
    }

    pub fn needs_solution(&self) -> bool {
        self.mutates_solution()
            || matches!(
                self,
                Action::ForwardProject { .. }
                    | Action::BackwardProject { .. }
                    | Action::BindView { .. }
            )
    }

    /// Worth running off the event loop.
    pub fn is_expensive(&self) -> bool {
        matches!(
            self,
            Action::UndoIsolate {}
                | Action::Reproject {}
                | Action::EngineerFeature { .. }
                | Action::ApplyClustering(_)
                | Action::ApplyProjection(_)
                | Action::ForwardProject { .. }
                | Action::BackwardProject { .. }
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub client_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solution_id: Option<SolutionId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_revision: Option<u64>,
    #[serde(flatten)]
    pub action: Action,
}

impl Event {
    pub fn new(client_id: impl Into<String>, action: Action) -> Self {
        Self {
            client_id: client_id.into(),
            solution_id: None,
            expected_revision: None,
            action,
        }
    }

    pub fn on(mut self, solution: SolutionId) -> Self {
        self.solution_id = Some(solution);
        self
    }

    pub fn at_revision(mut self, revision: u64) -> Self {
        self.expected_revision = Some(revision);
        self
    }
}

/// Typed refusal, sent to the originating client only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, thiserror::Error)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum Rejection {
    #[error(
        "revision conflict on solution {solution_id}: expected {expected:?}, current {current}"
    )]
    Conflict {
        solution_id: SolutionId,
        expected: Option<u64>,
        current: u64,
    },
    #[error("unknown solution {solution_id}")]
    UnknownSolution { solution_id: SolutionId },
    #[error("unknown view {view_id}")]
    UnknownView { view_id: ViewId },
    #[error("invalid payload: {message}")]
    Invalid { message: String },
}

fn invalid(message: impl Into<String>) -> Rejection {
    Rejection::Invalid {
        message: message.into(),
    }
}

impl From<crate::Error> for Rejection {
    fn from(e: crate::Error) -> Self {
        invalid(e.to_string())
    }
}

/// One unit of change announced to clients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Delta {
    /// A solution was created or changed; carries its full new state.
    Solution {
        solution: Solution,
        affected_views: Vec<ViewId>,
    },
    Views {
        views: Vec<ViewBinding>,
        removed: Vec<ViewId>,
        affected_views: Vec<ViewId>,
    },
    Dataset {
        columns: Vec<ColumnMeta>,
        warnings: usize,
    },
    ForwardProjection {
        solution_id: SolutionId,
        row: RowId,
        trajectory: Trajectory,
        affected_views: Vec<ViewId>,
    },
    BackwardProjection {
        solution_id: SolutionId,
        row: RowId,
        result: BackwardProjection,
        affected_views: Vec<ViewId>,
    },
}

impl Delta {
    pub fn affected_views(&self) -> &[ViewId] {
        match self {
            Delta::Solution { affected_views, .. }
            | Delta::Views { affected_views, .. }
            | Delta::ForwardProjection { affected_views, .. }
            | Delta::BackwardProjection { affected_views, .. } => affected_views,
            Delta::Dataset { .. } => &[],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Targets {
    All,
    Sender,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Applied {
    /// Session revision after the event.
    pub revision: u64,
    pub deltas: Vec<Delta>,
    pub targets: Targets,
}

/// An event with its precomputed work, ready for [`commit`].
#[derive(Debug, Clone)]
pub struct Prepared {
    event: Event,
    work: Work,
}

impl Prepared {
    pub fn event(&self) -> &Event {
        &self.event
    }
}

#[derive(Debug, Clone)]
enum Work {
    /// Cheap events done entirely at commit time.
    Deferred,
    Replace {
        solution: Box<Solution>,
        /// Revision the replacement was computed from.
        basis: u64,
        dataset: Option<(Arc<Dataset>, u64, usize)>,
    },
    Query(Box<Delta>),
}

fn solution_of<'a>(state: &'a SessionState, event: &Event) -> Result<&'a Solution, Rejection> {
    let id = event
        .solution_id
        .ok_or_else(|| invalid(format!("{} needs a solution_id", event.action.name())))?;
    state
        .solutions
        .get(&id)
        .ok_or(Rejection::UnknownSolution { solution_id: id })
}

fn dataset_of(state: &SessionState) -> Result<&Arc<Dataset>, Rejection> {
    state
        .dataset
        .as_ref()
        .ok_or_else(|| invalid("no dataset is loaded"))
}

fn check_revision(solution: &Solution, expected: Option<u64>) -> Result<(), Rejection> {
    match expected {
        None => Err(invalid("mutation events need an expected_revision")),
        Some(e) if e == solution.revision => Ok(()),
        Some(e) => Err(Rejection::Conflict {
            solution_id: solution.id,
            expected: Some(e),
            current: solution.revision,
        }),
    }
}

fn matrix_for(dataset: &Dataset, solution: &Solution) -> Result<MaterializedMatrix, Rejection> {
    Ok(materialize(
        dataset,
        &solution.active_rows,
        &solution.enabled_features,
        solution.standardize,
    )?)
}

fn compute_projection(
    dataset: &Dataset,
    solution: &Solution,
    params: ProjectionParams,
) -> Result<ProjectionResult, Rejection> {
    let mut params = params;
    params.standardize = solution.standardize;
    let matrix = matrix_for(dataset, solution)?;
    let mut result = project(&matrix, &params)?;
    if result.components.is_some() {
        let summaries = summarize(&matrix, DEFAULT_BINS)?;
        result.prolines = prolines(&result, &summaries, DEFAULT_PROLINE_STEPS)?;
    }
    Ok(result)
}

/// Source-unit feature vector of `row` as seen by the solution's projection.
fn projected_point(
    dataset: &Dataset,
    solution: &Solution,
    row: RowId,
) -> Result<(Arc<ProjectionResult>, Vec<f64>), Rejection> {
    let projection = solution
        .projection
        .clone()
        .ok_or_else(|| invalid(format!("solution {} has no projection", solution.id)))?;
    if !solution.active_rows.contains(&row) {
        return Err(invalid(format!(
            "row {row} is not active in solution {}",
            solution.id
        )));
    }
    let matrix = matrix_for(dataset, solution)?;
    let position = matrix
        .position_of_row(row)
        .expect("active row is materialized");
    Ok((projection, matrix.raw_row(position).to_vec()))
}

fn normalized_features(
    dataset: &Dataset,
    features: &[FeatureId],
) -> Result<Vec<FeatureId>, Rejection> {
    let numeric: BTreeSet<FeatureId> = dataset.numeric_columns().into_iter().collect();
    let mut out = BTreeSet::new();
    for &f in features {
        if !numeric.contains(&f) {
            return Err(invalid(format!("feature {f} is not a numeric column")));
        }
        out.insert(f);
    }
    if out.is_empty() {
        return Err(invalid("at least one feature must be enabled"));
    }
    Ok(out.into_iter().collect())
}

/// Validates `event` and computes its expensive parts without mutating `state`.
pub fn prepare(state: &SessionState, event: &Event) -> Result<Prepared, Rejection> {
    let deferred = || {
        Ok(Prepared {
            event: event.clone(),
            work: Work::Deferred,
        })
    };
    if !event.action.needs_solution() {
        return deferred();
    }
    let current = solution_of(state, event)?;
    if event.action.mutates_solution() {
        check_revision(current, event.expected_revision)?;
    }
    let dataset = dataset_of(state)?;
    let views = state.views_of(current.id);
    let mut next = current.clone();
    let mut new_dataset = None;

    match &event.action {
        Action::SetFilter { filter } => match filter {
            None => {
                next.filter = None;
                next.selection.clear();
            }
            Some(input) => {
                let expr = match input {
                    FilterInput::Text(text) => parse_filter(text, dataset)?,
                    FilterInput::Expr(expr) => {
                        expr.validate(dataset)?;
                        expr.clone()
                    }
                };
                next.selection = apply_filter(dataset, &current.active_rows, &expr)?;
                next.filter = Some(expr);
            }
        },
        Action::SelectPoints { rows } => {
            if let Some(r) = rows.iter().find(|r| !current.active_rows.contains(r)) {
                return Err(invalid(format!(
                    "row {r} is not active in solution {}",
                    current.id
                )));
            }
            next.selection = rows.iter().copied().collect();
            next.filter = None;
        }
        Action::Isolate {} => {
            if current.selection.is_empty() {
                return Err(invalid("nothing is selected"));
            }
            next.isolation_stack.push(current.active_rows.clone());
            next.active_rows = std::mem::take(&mut next.selection);
            next.filter = None;
            next.clustering = None;
            if let Some(p) = &current.projection {
                let mut restricted = (**p).clone();
                restricted.restrict_to_rows(&next.active_rows);
                next.projection = Some(Arc::new(restricted));
            }
        }
        Action::UndoIsolate {} => {
            next.active_rows = next
                .isolation_stack
                .pop()
                .ok_or_else(|| invalid("no isolation to undo"))?;
            next.selection.clear();
            next.filter = None;
            next.clustering = None;
            if let Some(p) = &current.projection {
                next.projection = Some(Arc::new(compute_projection(dataset, &next, p.params)?));
            }
        }
        Action::Reproject {} => {
            let params = current
                .projection
                .as_ref()
                .map(|p| p.params)
                .ok_or_else(|| invalid("solution has no projection to recompute"))?;
            next.projection = Some(Arc::new(compute_projection(dataset, &next, params)?));
        }
        Action::EnableFeatures {
            features,
            standardize,
        } => {
            next.enabled_features = normalized_features(dataset, features)?;
            if let Some(s) = standardize {
                next.standardize = *s;
            }
            if next.enabled_features != current.enabled_features
                || next.standardize != current.standardize
            {
                next.clustering = None;
                next.projection = None;
            }
        }
        Action::EngineerFeature { name, expression } => {
            let engineered = engineer_feature(dataset, name, expression)?;
            let id = engineered.dataset.n_cols() - 1;
            next.enabled_features.push(id);
            next.clustering = None;
            next.projection = None;
            new_dataset = Some((
                Arc::new(engineered.dataset),
                state.dataset_version,
                engineered.warnings,
            ));
        }
        Action::ApplyClustering(params) => {
            let matrix = matrix_for(dataset, current)?;
            next.clustering = Some(Arc::new(cluster_with_sweep(&matrix, params, None)?));
        }
        Action::ApplyProjection(params) => {
            next.projection = Some(Arc::new(compute_projection(dataset, current, *params)?));
        }
        Action::ForwardProject { row, perturbation } => {
            let (projection, point) = projected_point(dataset, current, *row)?;
            let pairs: Vec<(FeatureId, f64)> =
                perturbation.iter().map(|p| (p.feature, p.delta)).collect();
            let trajectory = forward_project(&projection, &point, &pairs)?;
            return Ok(Prepared {
                event: event.clone(),
                work: Work::Query(Box::new(Delta::ForwardProjection {
                    solution_id: current.id,
                    row: *row,
                    trajectory,
                    affected_views: views,
                })),
            });
        }
        Action::BackwardProject {
            row,
            target,
            frozen,
        } => {
            let (projection, point) = projected_point(dataset, current, *row)?;
            let result = backward_project(&projection, &point, target, frozen)?;
            return Ok(Prepared {
                event: event.clone(),
                work: Work::Query(Box::new(Delta::BackwardProjection {
                    solution_id: current.id,
                    row: *row,
                    result,
                    affected_views: views,
                })),
            });
        }
        Action::BindView { .. } => return deferred(),
        Action::CreateSolution { .. }
        | Action::MoveView { .. }
        | Action::ExtendView { .. }
        | Action::ClearView { .. }
        | Action::Snapshot {} => unreachable!("handled as deferred"),
    }
    next.revision = current.revision + 1;
    Ok(Prepared {
        event: event.clone(),
        work: Work::Replace {
            basis: current.revision,
            solution: Box::new(next),
            dataset: new_dataset,
        },
    })
}

/// Installs prepared work, provided nothing it depends on has moved.
pub fn commit(state: &mut SessionState, prepared: Prepared) -> Result<Applied, Rejection> {
    let Prepared { event, work } = prepared;
    match work {
        Work::Query(delta) => {
            solution_of(state, &event)?;
            Ok(Applied {
                revision: state.revision,
                deltas: vec![*delta],
                targets: Targets::All,
            })
        }
        Work::Replace {
            solution,
            basis,
            dataset,
        } => {
            let current = solution_of(state, &event)?;
            if current.revision != basis {
                return Err(Rejection::Conflict {
                    solution_id: current.id,
                    expected: Some(basis),
                    current: current.revision,
                });
            }
            let mut deltas = Vec::new();
            if let Some((ds, version, warnings)) = dataset {
                if version != state.dataset_version {
                    return Err(invalid(
                        "the dataset changed while the feature was being computed; retry",
                    ));
                }
                deltas.push(Delta::Dataset {
                    columns: ds.columns().iter().map(|c| c.meta.clone()).collect(),
                    warnings,
                });
                state.dataset = Some(ds);
                state.dataset_version += 1;
            }
            let id = solution.id;
            deltas.push(Delta::Solution {
                solution: (*solution).clone(),
                affected_views: state.views_of(id),
            });
            state.solutions.insert(id, *solution);
            state.revision += 1;
            Ok(Applied {
                revision: state.revision,
                deltas,
                targets: Targets::All,
            })
        }
        Work::Deferred => commit_deferred(state, &event),
    }
}

/// Validates and applies one event.
pub fn apply_event(state: &mut SessionState, event: Event) -> Result<Applied, Rejection> {
    let prepared = prepare(state, &event)?;
    commit(state, prepared)
}

fn check_slots(
    state: &SessionState,
    slots: &[usize],
    except: Option<ViewId>,
) -> Result<(), Rejection> {
    if slots.is_empty() {
        return Err(invalid("a view needs at least one screen slot"));
    }
    let occupied = state.occupied_slots(except);
    let mut seen = BTreeSet::new();
    for &s in slots {
        if s == 0 || s > state.slot_count {
            return Err(invalid(format!(
                "screen {s} is outside 1..={}",
                state.slot_count
            )));
        }
        if !seen.insert(s) {
            return Err(invalid(format!("screen {s} is listed twice")));
        }
        if occupied.contains(&s) {
            return Err(invalid(format!("screen {s} is already in use")));
        }
    }
    Ok(())
}

fn view_delta(state: &SessionState, view: ViewId) -> Delta {
    Delta::Views {
        views: vec![state.views[&view].clone()],
        removed: vec![],
        affected_views: vec![view],
    }
}

fn commit_deferred(state: &mut SessionState, event: &Event) -> Result<Applied, Rejection> {
    let delta = match &event.action {
        Action::Snapshot {} => {
            return Ok(Applied {
                revision: state.revision,
                deltas: vec![],
                targets: Targets::Sender,
            })
        }
        Action::CreateSolution {
            parent,
            rows,
            features,
        } => {
            let dataset = dataset_of(state)?.clone();
            let (active, default_features, standardize) = match parent {
                Some(pid) => {
                    let p = state
                        .solutions
                        .get(pid)
                        .ok_or(Rejection::UnknownSolution { solution_id: *pid })?;
                    let active: BTreeSet<RowId> = match rows {
                        Some(rows) => {
                            if let Some(r) = rows.iter().find(|r| !p.active_rows.contains(r)) {
                                return Err(invalid(format!(
                                    "row {r} is not active in parent solution {pid}"
                                )));
                            }
                            rows.iter().copied().collect()
                        }
                        None if !p.selection.is_empty() => p.selection.clone(),
                        None => p.active_rows.clone(),
                    };
                    (active, p.enabled_features.clone(), p.standardize)
                }
                None => {
                    let active: BTreeSet<RowId> = match rows {
                        Some(rows) => {
                            if let Some(r) = rows.iter().find(|&&r| r >= dataset.n_rows()) {
                                return Err(invalid(format!("row {r} is out of range")));
                            }
                            rows.iter().copied().collect()
                        }
                        None => (0..dataset.n_rows()).collect(),
                    };
                    (active, dataset.numeric_columns(), true)
                }
            };
            if active.is_empty() {
                return Err(invalid("a solution needs at least one row"));
            }
            let enabled =
                normalized_features(&dataset, features.as_deref().unwrap_or(&default_features))?;
            let id = state.next_solution_id;
            let solution = Solution {
                id,
                color: PALETTE[state.colors_assigned % PALETTE.len()].to_string(),
                parent: *parent,
                active_rows: active,
                enabled_features: enabled,
                standardize,
                filter: None,
                selection: BTreeSet::new(),
                isolation_stack: Vec::new(),
                clustering: None,
                projection: None,
                revision: 0,
            };
            state.next_solution_id += 1;
            state.colors_assigned += 1;
            state.solutions.insert(id, solution.clone());
            Delta::Solution {
                solution,
                affected_views: vec![],
            }
        }
        Action::BindView { kind, slots } => {
            let solution_id = solution_of(state, event)?.id;
            check_slots(state, slots, None)?;
            let view_id = state.next_view_id;
            state.next_view_id += 1;
            state.views.insert(
                view_id,
                ViewBinding {
                    view_id,
                    kind: *kind,
                    solution_id,
                    slots: slots.clone(),
                },
            );
            view_delta(state, view_id)
        }
        Action::MoveView { view_id, slots } => {
            if !state.views.contains_key(view_id) {
                return Err(Rejection::UnknownView { view_id: *view_id });
            }
            check_slots(state, slots, Some(*view_id))?;
            state.views.get_mut(view_id).unwrap().slots = slots.clone();
            view_delta(state, *view_id)
        }
        Action::ExtendView { view_id, screens } => {
            let view = state
                .views
                .get(view_id)
                .ok_or(Rejection::UnknownView { view_id: *view_id })?;
            if *screens < view.slots.len() {
                return Err(invalid(format!(
                    "view {view_id} already spans {} screens; extend cannot shrink it",
                    view.slots.len()
                )));
            }
            let occupied = state.occupied_slots(None);
            let free: Vec<usize> = (1..=state.slot_count)
                .filter(|s| !occupied.contains(s))
                .collect();
            let needed = screens - view.slots.len();
            if free.len() < needed {
                return Err(invalid(format!(
                    "only {} free screens, {needed} needed",
                    free.len()
                )));
            }
            state
                .views
                .get_mut(view_id)
                .unwrap()
                .slots
                .extend(&free[..needed]);
            view_delta(state, *view_id)
        }
        Action::ClearView { view_id } => {
            if state.views.remove(view_id).is_none() {
                return Err(Rejection::UnknownView { view_id: *view_id });
            }
            Delta::Views {
                views: vec![],
                removed: vec![*view_id],
                affected_views: vec![*view_id],
            }
        }
        other => unreachable!("{} is prepared eagerly", other.name()),
    };
    state.revision += 1;
    Ok(Applied {
        revision: state.revision,
        deltas: vec![delta],
        targets: Targets::All,
    })
}
