//! Collaborative session state: solutions, screen-slot view bindings,
//! revisioned events with broadcast deltas, the table overview, snapshots
//! and replayable event logs.

mod events;
mod lower;
mod overview;
mod protocol;
mod snapshot;
mod state;

pub use events::{
    apply_event, commit, prepare, Action, Applied, Delta, Event, FilterInput, Perturbation,
    Prepared, Rejection, Targets,
};
pub use lower::{lower_command, CommandContext};
pub use overview::{overview, RingEntry, SolutionOverview, TableOverview, THUMBNAIL_POINTS};
pub use protocol::{
    ClientMessage, Hub, Outgoing, Pending, Recipients, ServerKind, ServerMessage, Step,
    PROTOCOL_VERSION,
};
pub use snapshot::{
    read_json, replay, restore, restore_with, snapshot, write_json, DatasetRef, DerivedColumn,
    EventLog, SnapshotDocument, SCHEMA_VERSION,
};
pub use state::{
    SessionState, Solution, SolutionId, ViewBinding, ViewId, ViewKind, DEFAULT_SLOT_COUNT, PALETTE,
};

/// A session state paired with the log of the events it accepted.
#[derive(Debug, Clone)]
pub struct Session {
    state: SessionState,
    log: EventLog,
}

impl Session {
    pub fn new(state: SessionState) -> Self {
        let log = EventLog::starting_at(&state);
        Self { state, log }
    }

    pub fn state(&self) -> &SessionState {
        &self.state
    }

    pub fn log(&self) -> &EventLog {
        &self.log
    }

    /// Applies an event, recording it when accepted.
    pub fn apply(&mut self, event: Event) -> Result<Applied, Rejection> {
        let applied = apply_event(&mut self.state, event.clone())?;
        self.log.events.push(event);
        Ok(applied)
    }

    /// Commits work prepared elsewhere, recording the event when accepted.
    pub fn commit(&mut self, prepared: Prepared) -> Result<Applied, Rejection> {
        let event = prepared.event().clone();
        let applied = commit(&mut self.state, prepared)?;
        self.log.events.push(event);
        Ok(applied)
    }
}
