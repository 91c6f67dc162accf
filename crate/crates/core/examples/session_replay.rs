//! A shared analysis session: solutions, views, optimistic revisions,
//! snapshots and event-log replay.

use linked_eda::cluster::ClusteringParams;
use linked_eda::data::Dataset;
use linked_eda::reduce::ProjectionParams;
use linked_eda::session::{
    overview, replay, restore_with, snapshot, Action, Event, FilterInput, Session, SessionState,
    ViewKind, DEFAULT_SLOT_COUNT,
};

fn dataset() -> linked_eda::Result<Dataset> {
    let rows: Vec<Vec<Option<f64>>> = (0..90)
        .map(|i| {
            let t = i as f64;
            let shift = (i % 3) as f64 * 5.0;
            vec![
                Some(shift + (t * 0.9).sin()),
                Some(shift + (t * 1.7).cos()),
                Some(t % 7.0),
                (i % 11 != 0).then_some(t * 0.1),
            ]
        })
        .collect();
    Dataset::from_numeric_rows(&["steps", "sleep", "visits", "age"], &rows)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let data = dataset()?;
    let mut session = Session::new(SessionState::new(Some(data.clone()), DEFAULT_SLOT_COUNT)?);
    let create = |parent| Action::CreateSolution {
        parent,
        rows: None,
        features: None,
    };
    let rev = |session: &Session, id| session.state().solution(id).map_or(0, |s| s.revision);

    session.apply(Event::new("alice", create(None)))?;
    session.apply(
        Event::new("alice", Action::ApplyProjection(ProjectionParams::pca(2)))
            .on(0)
            .at_revision(rev(&session, 0)),
    )?;
    session.apply(
        Event::new(
            "alice",
            Action::BindView {
                kind: ViewKind::Projection,
                slots: vec![1, 2],
            },
        )
        .on(0),
    )?;

    // bob narrows the data down and branches a second solution from it
    let filter = FilterInput::Text("steps > 4 and age >= 2".into());
    session.apply(
        Event::new(
            "bob",
            Action::SetFilter {
                filter: Some(filter),
            },
        )
        .on(0)
        .at_revision(rev(&session, 0)),
    )?;
    session.apply(Event::new("bob", create(Some(0))))?;
    let child = session.state().solutions().last().unwrap().id;
    session.apply(
        Event::new(
            "bob",
            Action::ApplyClustering(ClusteringParams::kmeans(2, 0)),
        )
        .on(child)
        .at_revision(rev(&session, child)),
    )?;
    session.apply(
        Event::new(
            "bob",
            Action::BindView {
                kind: ViewKind::Clustering,
                slots: vec![3],
            },
        )
        .on(child),
    )?;

    // alice still believes solution 0 is at revision 0
    let stale = Event::new(
        "alice",
        Action::ApplyClustering(ClusteringParams::kmeans(3, 0)),
    )
    .on(0)
    .at_revision(0);
    match session.apply(stale) {
        Ok(_) => println!("stale write accepted?"),
        Err(r) => println!("rejected: {r}"),
    }

    for s in overview(session.state()).solutions {
        println!(
            "solution {} [{}] rev {} rows {} silhouette {:.3?}",
            s.solution_id, s.color, s.revision, s.n_rows, s.silhouette_mean
        );
    }
    for v in session.state().views() {
        println!(
            "view {} ({}) of solution {} on slots {:?}",
            v.view_id, v.kind, v.solution_id, v.slots
        );
    }

    let saved = serde_json::to_string(&snapshot(session.state()))?;
    let restored = restore_with(&serde_json::from_str(&saved)?, data.clone())?;
    println!(
        "snapshot of {} bytes restores equal: {}",
        saved.len(),
        snapshot(&restored) == snapshot(session.state())
    );

    let replayed = replay(session.log(), Some(data))?;
    println!(
        "replaying {} logged events gives the same state: {}",
        session.log().events.len(),
        snapshot(&replayed) == snapshot(session.state())
    );
    Ok(())
}
