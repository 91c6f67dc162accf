//! Wire protocol and the transport-independent message handler.
//!
//! Clients send `{v, type, seq, solution_id?, expected_revision?, payload}`
//! where `type` is an event type or one of `hello`, `command`, `export_log`
//! and `highlight_views`. Commands carry `text` and an optional `context`.
//! The server answers with `{v, type, revision, seq?, payload}` where `type`
//! is `delta`, `reject`, `snapshot`, `log` or `highlight_views`.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::events::{Action, Applied, Event, Prepared, Rejection, Targets};
use super::lower::{lower_command, CommandContext};
use super::overview::overview;
use super::snapshot::snapshot;
use super::state::{SessionState, SolutionId};
use super::Session;
use crate::command::{parse_command, print_command, CommandError};

pub const PROTOCOL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClientMessage {
    pub v: u32,
    #[serde(rename = "type")]
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seq: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solution_id: Option<SolutionId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_revision: Option<u64>,
    #[serde(default)]
    pub payload: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub context: Option<CommandContext>,
}

impl ClientMessage {
    pub fn new(kind: impl Into<String>, payload: Value) -> Self {
        Self {
            v: PROTOCOL_VERSION,
            kind: kind.into(),
            seq: None,
            solution_id: None,
            expected_revision: None,
            payload,
            text: None,
            context: None,
        }
    }

    /// Wraps an event's action, solution and revision.
    pub fn event(event: &Event) -> Self {
        let tagged = serde_json::to_value(&event.action).expect("actions serialize");
        let mut msg = Self::new(
            event.action.name(),
            tagged.get("payload").cloned().unwrap_or(Value::Null),
        );
        msg.solution_id = event.solution_id;
        msg.expected_revision = event.expected_revision;
        msg
    }

    pub fn command(text: impl Into<String>, context: CommandContext) -> Self {
        let mut msg = Self::new("command", Value::Null);
        msg.text = Some(text.into());
        msg.context = Some(context);
        msg
    }

    pub fn with_seq(mut self, seq: u64) -> Self {
        self.seq = Some(seq);
        self
    }

    pub fn on(mut self, solution: SolutionId) -> Self {
        self.solution_id = Some(solution);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ServerKind {
    Delta,
    Reject,
    Snapshot,
    Log,
    HighlightViews,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServerMessage {
    pub v: u32,
    #[serde(rename = "type")]
    pub kind: ServerKind,
    pub revision: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seq: Option<u64>,
    pub payload: Value,
}

impl ServerMessage {
    fn new(kind: ServerKind, revision: u64, seq: Option<u64>, payload: Value) -> Self {
        Self {
            v: PROTOCOL_VERSION,
            kind,
            revision,
            seq,
            payload,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("server messages serialize")
    }
}

/// Who receives an outgoing message.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Recipients {
    All,
    Client(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outgoing {
    pub to: Recipients,
    pub message: ServerMessage,
}

/// Result of handling one client message.
#[derive(Debug)]
pub enum Step {
    Done(Vec<Outgoing>),
    /// Expensive event: run [`super::prepare`] on `basis` off the handler,
    /// then pass the outcome to [`Hub::finish`].
    Compute(Box<Pending>),
}

#[derive(Debug)]
pub struct Pending {
    pub client_id: String,
    pub seq: Option<u64>,
    pub event: Event,
    pub command: Option<String>,
    pub basis: SessionState,
}

/// Owns the session and turns client messages into server messages.
#[derive(Debug)]
pub struct Hub {
    session: Session,
}

fn protocol_error(message: impl Into<String>) -> Value {
    json!({ "reason": "protocol", "message": message.into() })
}

fn rejection_payload(r: &Rejection) -> Value {
    let mut v = serde_json::to_value(r).expect("rejections serialize");
    v["message"] = Value::String(r.to_string());
    v
}

fn command_error_payload(e: &CommandError) -> Value {
    json!({ "reason": "command", "message": e.to_string(), "error": e })
}

impl Hub {
    pub fn new(session: Session) -> Self {
        Self { session }
    }

    pub fn session(&self) -> &Session {
        &self.session
    }

    pub fn into_session(self) -> Session {
        self.session
    }

    fn reply(&self, client: &str, kind: ServerKind, seq: Option<u64>, payload: Value) -> Outgoing {
        Outgoing {
            to: Recipients::Client(client.to_string()),
            message: ServerMessage::new(kind, self.session.state().revision(), seq, payload),
        }
    }

    fn reject(&self, client: &str, seq: Option<u64>, payload: Value) -> Step {
        Step::Done(vec![self.reply(client, ServerKind::Reject, seq, payload)])
    }

    /// The `snapshot` reply sent on `hello`.
    pub fn snapshot_message(&self, seq: Option<u64>) -> ServerMessage {
        let state = self.session.state();
        ServerMessage::new(
            ServerKind::Snapshot,
            state.revision(),
            seq,
            json!({ "snapshot": snapshot(state), "overview": overview(state) }),
        )
    }

    pub fn receive_text(&mut self, client: &str, text: &str) -> Step {
        match serde_json::from_str::<ClientMessage>(text) {
            Ok(msg) => self.receive(client, msg),
            Err(e) => self.reject(
                client,
                None,
                protocol_error(format!("malformed message: {e}")),
            ),
        }
    }

    pub fn receive(&mut self, client: &str, msg: ClientMessage) -> Step {
        let seq = msg.seq;
        if msg.v != PROTOCOL_VERSION {
            return self.reject(
                client,
                seq,
                protocol_error(format!("unsupported protocol version {}", msg.v)),
            );
        }
        let (event, command) = match msg.kind.as_str() {
            "hello" => {
                let message = self.snapshot_message(seq);
                return Step::Done(vec![Outgoing {
                    to: Recipients::Client(client.to_string()),
                    message,
                }]);
            }
            "export_log" => {
                let log = serde_json::to_value(self.session.log()).expect("logs serialize");
                return Step::Done(vec![self.reply(client, ServerKind::Log, seq, log)]);
            }
            "highlight_views" => {
                let message = ServerMessage::new(
                    ServerKind::HighlightViews,
                    self.session.state().revision(),
                    seq,
                    json!({ "client_id": client, "request": msg.payload }),
                );
                return Step::Done(vec![Outgoing {
                    to: Recipients::All,
                    message,
                }]);
            }
            "command" => {
                let Some(text) = msg.text.as_deref() else {
                    return self.reject(
                        client,
                        seq,
                        protocol_error("command message without text"),
                    );
                };
                let state = self.session.state();
                let parsed = match parse_command(text, state.dataset()) {
                    Ok(c) => c,
                    Err(e) => return self.reject(client, seq, command_error_payload(&e)),
                };
                let context = msg.context.unwrap_or_default();
                match lower_command(state, client, msg.solution_id, &context, &parsed) {
                    Ok(event) => (event, Some(print_command(&parsed))),
                    Err(r) => return self.reject(client, seq, rejection_payload(&r)),
                }
            }
            kind => {
                let payload = match msg.payload {
                    Value::Null => json!({}),
                    p => p,
                };
                match serde_json::from_value::<Action>(json!({ "type": kind, "payload": payload }))
                {
                    Ok(action) => {
                        let mut event = Event::new(client, action);
                        event.solution_id = msg.solution_id;
                        event.expected_revision = msg.expected_revision;
                        (event, None)
                    }
                    Err(e) => {
                        return self.reject(
                            client,
                            seq,
                            protocol_error(format!("bad '{kind}' message: {e}")),
                        )
                    }
                }
            }
        };
        if event.action.is_expensive() {
            return Step::Compute(Box::new(Pending {
                client_id: client.to_string(),
                seq,
                event,
                command,
                basis: self.session.state().clone(),
            }));
        }
        let event_type = event.action.name();
        let outcome = self.session.apply(event);
        Step::Done(self.outcome(client, seq, event_type, command, outcome))
    }

    /// Commits work prepared from a [`Pending`].
    pub fn finish(
        &mut self,
        pending: &Pending,
        prepared: Result<Prepared, Rejection>,
    ) -> Vec<Outgoing> {
        let outcome = prepared.and_then(|p| self.session.commit(p));
        self.outcome(
            &pending.client_id,
            pending.seq,
            pending.event.action.name(),
            pending.command.clone(),
            outcome,
        )
    }

    /// Handles a message to completion on the current thread.
    pub fn receive_blocking(&mut self, client: &str, msg: ClientMessage) -> Vec<Outgoing> {
        match self.receive(client, msg) {
            Step::Done(out) => out,
            Step::Compute(p) => {
                let prepared = super::prepare(&p.basis, &p.event);
                self.finish(&p, prepared)
            }
        }
    }

    fn outcome(
        &self,
        client: &str,
        seq: Option<u64>,
        event_type: &str,
        command: Option<String>,
        outcome: Result<Applied, Rejection>,
    ) -> Vec<Outgoing> {
        match outcome {
            Err(r) => vec![self.reply(client, ServerKind::Reject, seq, rejection_payload(&r))],
            Ok(applied) => {
                let state = self.session.state();
                let mut payload = json!({
                    "client_id": client,
                    "event_type": event_type,
                    "deltas": applied.deltas,
                    "overview": overview(state),
                });
                if let Some(c) = command {
                    payload["command"] = Value::String(c);
                }
                let to = match applied.targets {
                    Targets::All => Recipients::All,
                    Targets::Sender => Recipients::Client(client.to_string()),
                };
                vec![Outgoing {
                    to,
                    message: ServerMessage::new(ServerKind::Delta, applied.revision, seq, payload),
                }]
            }
        }
    }
}
