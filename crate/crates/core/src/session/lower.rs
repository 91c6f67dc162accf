use serde::{Deserialize, Serialize};

use super::events::{Action, Event, FilterInput, Perturbation, Rejection};
use super::state::{SessionState, SolutionId, ViewId, ViewKind};
use crate::cluster::{ClusterAlgorithm, ClusteringParams, Linkage};
use crate::command::Command;
use crate::data::RowId;
use crate::metric::Metric;
use crate::reduce::{ProjectionAlgorithm, ProjectionParams};

/// What "this data point" and "this view" refer to on the sending client.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommandContext {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub selection: Option<Vec<RowId>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub focused_view: Option<ViewId>,
}

fn invalid(message: impl Into<String>) -> Rejection {
    Rejection::Invalid {
        message: message.into(),
    }
}

/// Translates a parsed command into the event it stands for. Solution
/// mutations are pinned to the solution's current revision.
///
/// The target solution of view commands and perturbations is `solution`,
/// falling back to the focused view's solution.
pub fn lower_command(
    state: &SessionState,
    client_id: &str,
    solution: Option<SolutionId>,
    context: &CommandContext,
    command: &Command,
) -> Result<Event, Rejection> {
    let focused = match context.focused_view {
        Some(id) => Some(
            state
                .view(id)
                .ok_or(Rejection::UnknownView { view_id: id })?,
        ),
        None => None,
    };
    let implicit = || {
        solution
            .or(focused.map(|v| v.solution_id))
            .ok_or_else(|| invalid("no solution in context; send solution_id or focus a view"))
    };
    // the focused view if it has this kind, else the solution's only view of it
    let view_of_kind = |kind: ViewKind| -> Result<Option<ViewId>, Rejection> {
        if let Some(v) = focused.filter(|v| v.kind == kind) {
            return Ok(Some(v.view_id));
        }
        let sol = implicit()?;
        let matching: Vec<ViewId> = state
            .views()
            .filter(|v| v.solution_id == sol && v.kind == kind)
            .map(|v| v.view_id)
            .collect();
        match matching.as_slice() {
            [] => Ok(None),
            [one] => Ok(Some(*one)),
            _ => Err(invalid(format!(
                "solution {sol} has several {kind} views; focus one"
            ))),
        }
    };

    let (target, action) = match command {
        Command::ShowView { kind, slots } => (
            Some(implicit()?),
            Action::BindView {
                kind: *kind,
                slots: slots.clone(),
            },
        ),
        Command::LoadViewOnScreens { kind, slots } => match view_of_kind(*kind)? {
            Some(view_id) => (
                None,
                Action::MoveView {
                    view_id,
                    slots: slots.clone(),
                },
            ),
            None => (
                Some(implicit()?),
                Action::BindView {
                    kind: *kind,
                    slots: slots.clone(),
                },
            ),
        },
        Command::ExtendView { kind, screens } => {
            let view_id =
                view_of_kind(*kind)?.ok_or_else(|| invalid(format!("no {kind} view to extend")))?;
            (
                None,
                Action::ExtendView {
                    view_id,
                    screens: *screens,
                },
            )
        }
        Command::ApplyClustering {
            algorithm,
            k,
            solution,
        } => {
            let params = match algorithm {
                ClusterAlgorithm::Kmeans => ClusteringParams::kmeans(*k, 0),
                ClusterAlgorithm::Agglomerative => {
                    ClusteringParams::agglomerative(*k, Metric::Euclidean, Linkage::Average)
                }
            };
            (Some(*solution), Action::ApplyClustering(params))
        }
        Command::ApplyProjection {
            algorithm,
            dims,
            metric,
            solution,
        } => {
            let params = match algorithm {
                ProjectionAlgorithm::Pca => ProjectionParams::pca(*dims),
                ProjectionAlgorithm::Cmds => {
                    ProjectionParams::cmds(*dims, metric.unwrap_or_default())
                }
            };
            (Some(*solution), Action::ApplyProjection(params))
        }
        Command::ForwardPerturb { feature, delta } => {
            let row =
                match context.selection.as_deref() {
                    Some([row]) => *row,
                    _ => return Err(invalid(
                        "'this data point' needs exactly one selected row in the command context",
                    )),
                };
            let dataset = state
                .dataset()
                .ok_or_else(|| invalid("no dataset loaded"))?;
            let feature = dataset
                .column_index(feature)
                .ok_or_else(|| invalid(format!("unknown feature '{feature}'")))?;
            (
                Some(implicit()?),
                Action::ForwardProject {
                    row,
                    perturbation: vec![Perturbation {
                        feature,
                        delta: *delta,
                    }],
                },
            )
        }
        Command::FilterWhere { solution, filter } => (
            Some(*solution),
            Action::SetFilter {
                filter: Some(FilterInput::Expr(filter.clone())),
            },
        ),
    };

    let mut event = Event::new(client_id, action);
    if let Some(id) = target {
        let sol = state
            .solution(id)
            .ok_or(Rejection::UnknownSolution { solution_id: id })?;
        event = event.on(id);
        if event.action.mutates_solution() {
            event = event.at_revision(sol.revision);
        }
    }
    Ok(event)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::command::parse_command;
    use crate::data::Dataset;
    use crate::session::apply_event;

    fn state() -> SessionState {
        let rows: Vec<Vec<Option<f64>>> = (0..12)
            .map(|i| vec![Some(i as f64), Some((i * i) as f64 % 7.0)])
            .collect();
        let ds = Dataset::from_numeric_rows(&["steps", "sleep"], &rows).unwrap();
        let mut s = SessionState::new(Some(ds), 15).unwrap();
        let create = Action::CreateSolution {
            parent: None,
            rows: None,
            features: None,
        };
        apply_event(&mut s, Event::new("t", create)).unwrap();
        s
    }

    fn lower(s: &SessionState, text: &str, ctx: &CommandContext) -> Result<Event, Rejection> {
        lower_command(
            s,
            "c",
            Some(0),
            ctx,
            &parse_command(text, s.dataset()).unwrap(),
        )
    }

    #[test]
    fn view_commands_resolve_bindings() {
        let mut s = state();
        let bind = lower(
            &s,
            "show projection view on screen number 13",
            &CommandContext::default(),
        )
        .unwrap();
        assert_eq!(bind.solution_id, Some(0));
        apply_event(&mut s, bind).unwrap();
        let ext = lower(
            &s,
            "extend projection view to 2 screens",
            &CommandContext::default(),
        )
        .unwrap();
        assert_eq!(
            ext.action,
            Action::ExtendView {
                view_id: 0,
                screens: 2
            }
        );
        let load = lower(
            &s,
            "load projection view on screens 1 and 2",
            &CommandContext::default(),
        )
        .unwrap();
        assert_eq!(
            load.action,
            Action::MoveView {
                view_id: 0,
                slots: vec![1, 2]
            }
        );
        assert!(lower(
            &s,
            "extend table view to 2 screens",
            &CommandContext::default()
        )
        .is_err());
    }

    #[test]
    fn mutations_pin_revision() {
        let mut s = state();
        let e = lower(
            &s,
            "apply kmeans clustering with 2 clusters to solution 0",
            &CommandContext::default(),
        )
        .unwrap();
        assert_eq!(e.expected_revision, Some(0));
        apply_event(&mut s, e).unwrap();
        let f = lower(
            &s,
            "filter solution 0 where steps > 4",
            &CommandContext::default(),
        )
        .unwrap();
        assert_eq!(f.expected_revision, Some(1));
        assert!(lower(
            &s,
            "filter solution 9 where steps > 4",
            &CommandContext::default()
        )
        .is_err());
    }

    #[test]
    fn perturbation_needs_one_selected_row() {
        let s = state();
        let text = "try increasing the steps value of this data point by 5";
        assert!(lower(&s, text, &CommandContext::default()).is_err());
        let ctx = CommandContext {
            selection: Some(vec![3]),
            focused_view: None,
        };
        let e = lower(&s, text, &ctx).unwrap();
        assert_eq!(
            e.action,
            Action::ForwardProject {
                row: 3,
                perturbation: vec![Perturbation {
                    feature: 0,
                    delta: 5.0
                }]
            }
        );
    }
}
