//! Headless analysis runs: a config of ordered steps applied to one
//! solution through the same event path as a live session, with every
//! step's result written as a JSON artifact.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::cluster::{ClusterAlgorithm, ClusteringParams};
use crate::data::{
    load_csv, materialize, parse_filter, ColumnKind, ColumnMeta, CsvOptions, Dataset,
};
use crate::error::{Error, Result};
use crate::reduce::ProjectionParams;
use crate::select::{rank_features, RankOptions, RankingMethod};
use crate::session::{
    overview, read_json, replay, snapshot, write_json, Action, Event, EventLog, FilterInput,
    Session, SessionState, Solution, DEFAULT_SLOT_COUNT,
};
use crate::stats::{significance, summarize, SignificanceMethod, DEFAULT_BINS};

/// Client id recorded on events issued by a pipeline run.
pub const PIPELINE_CLIENT: &str = "pipeline";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "step", rename_all = "snake_case")]
pub enum PipelineStep {
    /// Keeps only the rows matching the filter.
    Filter {
        filter: String,
    },
    EnableFeatures {
        features: Vec<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        standardize: Option<bool>,
    },
    Cluster(ClusteringParams),
    Project(ProjectionParams),
    Significance {
        method: SignificanceMethod,
    },
    Rank {
        method: RankingMethod,
        #[serde(default)]
        options: RankOptions,
    },
}

impl PipelineStep {
    pub fn name(&self) -> &'static str {
        match self {
            PipelineStep::Filter { .. } => "filter",
            PipelineStep::EnableFeatures { .. } => "enable_features",
            PipelineStep::Cluster(_) => "cluster",
            PipelineStep::Project(_) => "project",
            PipelineStep::Significance { .. } => "significance",
            PipelineStep::Rank { .. } => "rank",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    /// Relative paths resolve against the config file's directory.
    pub dataset: PathBuf,
    #[serde(default)]
    pub csv_options: CsvOptions,
    #[serde(default)]
    pub steps: Vec<PipelineStep>,
    /// Overrides the seed of every k-means step when set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl PipelineConfig {
    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut config: PipelineConfig = read_json(path)?;
        if config.dataset.is_relative() {
            if let Some(dir) = path.parent() {
                config.dataset = dir.join(&config.dataset);
            }
        }
        Ok(config)
    }
}

/// Process exit code for a failed run: 1 for I/O, 2 for validation.
pub fn exit_code(error: &Error) -> i32 {
    match error {
        Error::Io { .. } => 1,
        _ => 2,
    }
}

/// Checks every step against the schema without running anything.
pub fn validate(config: &PipelineConfig, dataset: &Dataset) -> Result<()> {
    let mut clustered = false;
    let mut features = dataset.numeric_columns().len();
    for (i, step) in config.steps.iter().enumerate() {
        let fail = |msg: String| Error::invalid(format!("step {i} ({}): {msg}", step.name()));
        match step {
            PipelineStep::Filter { filter } => {
                parse_filter(filter, dataset).map_err(|e| fail(e.to_string()))?;
            }
            PipelineStep::EnableFeatures {
                features: names, ..
            } => {
                for name in names {
                    let id = dataset
                        .column_index(name)
                        .ok_or_else(|| fail(format!("unknown column '{name}'")))?;
                    if dataset.column(id).kind() != ColumnKind::Numeric {
                        return Err(fail(format!("column '{name}' is not numeric")));
                    }
                }
                features = names.len();
                if features == 0 {
                    return Err(fail("no features".into()));
                }
            }
            PipelineStep::Cluster(p) => {
                if p.k < 2 {
                    return Err(fail(format!("k must be at least 2, got {}", p.k)));
                }
                clustered = true;
            }
            PipelineStep::Project(p) => {
                if p.dims == 0 {
                    return Err(fail("dims must be positive".into()));
                }
            }
            PipelineStep::Significance { .. } if !clustered => {
                return Err(fail("needs an earlier cluster step".into()));
            }
            PipelineStep::Significance { .. } => {}
            PipelineStep::Rank { method, .. } => {
                if method.needs_labels() && !clustered {
                    return Err(fail(format!(
                        "{method} ranking needs an earlier cluster step"
                    )));
                }
                if features < 2 {
                    return Err(fail("ranking needs at least two features".into()));
                }
            }
        }
    }
    Ok(())
}

fn column_metas(dataset: &Dataset) -> Vec<ColumnMeta> {
    dataset.columns().iter().map(|c| c.meta.clone()).collect()
}

fn dataset_artifact(dataset: &Dataset) -> Result<Value> {
    let all = (0..dataset.n_rows()).collect();
    let numeric = dataset.numeric_columns();
    let summaries = if numeric.is_empty() || dataset.n_rows() == 0 {
        Vec::new()
    } else {
        summarize(&materialize(dataset, &all, &numeric, false)?, DEFAULT_BINS)?
    };
    Ok(json!({
        "name": dataset.name(),
        "sha256": dataset.source().sha256,
        "n_rows": dataset.n_rows(),
        "n_cols": dataset.n_cols(),
        "columns": column_metas(dataset),
        "summaries": summaries,
    }))
}

/// Files written by a run, in order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunReport {
    pub artifacts: Vec<PathBuf>,
}

struct Writer<'a> {
    out: &'a Path,
    report: RunReport,
}

impl Writer<'_> {
    fn write<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let path = self.out.join(name);
        write_json(&path, value)?;
        self.report.artifacts.push(path);
        Ok(())
    }
}

fn apply(session: &mut Session, action: Action) -> Result<()> {
    let current = session.state().solution(0).map(|s| s.revision);
    let mut event = Event::new(PIPELINE_CLIENT, action);
    if let Some(rev) = current {
        event = event.on(0);
        if event.action.mutates_solution() {
            event = event.at_revision(rev);
        }
    }
    let name = event.action.name();
    session
        .apply(event)
        .map(|_| ())
        .map_err(|r| Error::invalid(format!("{name} rejected: {r}")))
}

fn solution0(session: &Session) -> &Solution {
    session
        .state()
        .solution(0)
        .expect("pipeline solution exists")
}

/// Runs `config` against an already loaded dataset, writing artifacts into `out`.
pub fn run_with(config: &PipelineConfig, dataset: Dataset, out: &Path) -> Result<RunReport> {
    validate(config, &dataset)?;
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let mut w = Writer {
        out,
        report: RunReport::default(),
    };
    w.write("dataset.json", &dataset_artifact(&dataset)?)?;
    if config.steps.is_empty() {
        return Ok(w.report);
    }

    let state = SessionState::new(Some(dataset), DEFAULT_SLOT_COUNT)?
        .with_csv_options(config.csv_options.clone());
    let mut session = Session::new(state);
    apply(
        &mut session,
        Action::CreateSolution {
            parent: None,
            rows: None,
            features: None,
        },
    )?;

    for (i, step) in config.steps.iter().enumerate() {
        let name = format!("step_{i:02}_{}.json", step.name());
        match step {
            PipelineStep::Filter { filter } => {
                let text = FilterInput::Text(filter.clone());
                apply(&mut session, Action::SetFilter { filter: Some(text) })?;
                if solution0(&session).selection.is_empty() {
                    return Err(Error::Degenerate(format!(
                        "step {i} (filter): no rows match '{filter}'"
                    )));
                }
                apply(&mut session, Action::Isolate {})?;
                let sol = solution0(&session);
                w.write(&name, &json!({ "filter": filter, "rows": sol.active_rows }))?;
            }
            PipelineStep::EnableFeatures {
                features,
                standardize,
            } => {
                let ds = session.state().dataset().expect("dataset loaded");
                let ids = features.iter().filter_map(|f| ds.column_index(f)).collect();
                apply(
                    &mut session,
                    Action::EnableFeatures {
                        features: ids,
                        standardize: *standardize,
                    },
                )?;
                let sol = solution0(&session);
                w.write(
                    &name,
                    &json!({ "features": sol.enabled_features, "standardize": sol.standardize }),
                )?;
            }
            PipelineStep::Cluster(params) => {
                let mut params = *params;
                if let (Some(seed), ClusterAlgorithm::Kmeans) = (config.seed, params.algorithm) {
                    params.seed = seed;
                }
                apply(&mut session, Action::ApplyClustering(params))?;
                w.write(
                    &name,
                    solution0(&session)
                        .clustering
                        .as_deref()
                        .expect("clustering installed"),
                )?;
            }
            PipelineStep::Project(params) => {
                apply(&mut session, Action::ApplyProjection(*params))?;
                w.write(
                    &name,
                    solution0(&session)
                        .projection
                        .as_deref()
                        .expect("projection installed"),
                )?;
            }
            PipelineStep::Significance { method } => {
                let (matrix, labels) = labelled_matrix(&session)?;
                w.write(&name, &significance(&matrix, &labels, *method)?)?;
            }
            PipelineStep::Rank { method, options } => {
                let (matrix, labels) = labelled_matrix(&session)?;
                let labels = method.needs_labels().then_some(labels.as_slice());
                w.write(&name, &rank_features(&matrix, *method, labels, *options)?)?;
            }
        }
    }

    write_session_artifacts(&mut w, session.state())?;
    w.write("events.json", session.log())?;
    Ok(w.report)
}

/// The solution's matrix with its current cluster labels (empty when unclustered).
fn labelled_matrix(session: &Session) -> Result<(crate::data::MaterializedMatrix, Vec<usize>)> {
    let state = session.state();
    let sol = solution0(session);
    let ds = state.dataset().expect("dataset loaded");
    let matrix = materialize(ds, &sol.active_rows, &sol.enabled_features, sol.standardize)?;
    let labels = match &sol.clustering {
        Some(c) if c.row_ids == matrix.row_ids => c.labels.clone(),
        Some(_) => {
            return Err(Error::invalid(
                "clustering is stale for the current rows; cluster again",
            ))
        }
        None => Vec::new(),
    };
    Ok((matrix, labels))
}

fn write_session_artifacts(w: &mut Writer<'_>, state: &SessionState) -> Result<()> {
    w.write("summary.json", &overview(state))?;
    w.write("snapshot.json", &snapshot(state))
}

/// Loads the config's dataset and runs it.
pub fn run_analyze(config: &PipelineConfig, out: &Path) -> Result<RunReport> {
    let dataset = load_csv(&config.dataset, &config.csv_options)?;
    run_with(config, dataset, out)
}

/// Replays an exported event log and writes the resulting session artifacts.
pub fn run_replay(log_path: &Path, out: &Path) -> Result<RunReport> {
    let log: EventLog = read_json(log_path)?;
    let state = replay(&log, None)?;
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let mut w = Writer {
        out,
        report: RunReport::default(),
    };
    if let Some(ds) = state.dataset() {
        w.write("dataset.json", &dataset_artifact(ds)?)?;
    }
    for sol in state.solutions() {
        let value = json!({
            "solution": sol.id,
            "clustering": sol.clustering,
            "projection": sol.projection,
        });
        w.write(&format!("solution_{}.json", sol.id), &value)?;
    }
    write_session_artifacts(&mut w, &state)?;
    Ok(w.report)
}
