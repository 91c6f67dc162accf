//! Websocket front end for a [`Hub`].
//!
//! One actor task owns the hub. Connections forward text frames to it and
//! receive whatever it routes back. Expensive events are prepared on the
//! blocking pool against a copy of the state and committed by the actor
//! when done, so cheap events keep flowing meanwhile.

use std::collections::BTreeMap;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::response::IntoResponse;
use axum::routing::get;
use axum::Router;
use futures::{SinkExt, StreamExt};
use tokio::net::TcpListener;
use tokio::sync::mpsc;

use crate::data::{load_csv, CsvOptions};
use crate::error::Result;
use crate::session::{
    prepare, Action, ClientMessage, Event, Hub, Outgoing, Pending, Prepared, Recipients, Rejection,
    Session, SessionState, Step,
};

/// Client id used for the event that preloads solution 0.
pub const SERVER_CLIENT: &str = "server";

/// Builds the hub a server starts from, with `data` preloaded as solution 0.
pub fn initial_hub(data: Option<&PathBuf>, slots: usize) -> Result<Hub> {
    let options = CsvOptions::default();
    let dataset = data.map(|p| load_csv(p, &options)).transpose()?;
    let preload = dataset.is_some();
    let state = SessionState::new(dataset, slots)?.with_csv_options(options);
    let mut session = Session::new(state);
    if preload {
        let create = Action::CreateSolution {
            parent: None,
            rows: None,
            features: None,
        };
        session
            .apply(Event::new(SERVER_CLIENT, create))
            .map_err(|r| crate::Error::invalid(r.to_string()))?;
    }
    Ok(Hub::new(session))
}

enum Input {
    Connect {
        client: String,
        tx: mpsc::UnboundedSender<String>,
    },
    Text {
        client: String,
        text: String,
    },
    Disconnect {
        client: String,
    },
    Computed {
        pending: Box<Pending>,
        result: Result<Prepared, Rejection>,
    },
}

#[derive(Clone)]
struct Shared {
    actor: mpsc::UnboundedSender<Input>,
    next_client: Arc<AtomicU64>,
}

async fn run_actor(
    mut hub: Hub,
    mut rx: mpsc::UnboundedReceiver<Input>,
    tx: mpsc::UnboundedSender<Input>,
) {
    let mut clients: BTreeMap<String, mpsc::UnboundedSender<String>> = BTreeMap::new();
    while let Some(input) = rx.recv().await {
        let outgoing = match input {
            Input::Connect { client, tx } => {
                clients.insert(client, tx);
                continue;
            }
            Input::Disconnect { client } => {
                clients.remove(&client);
                continue;
            }
            Input::Text { client, text } => match hub.receive_text(&client, &text) {
                Step::Done(out) => out,
                Step::Compute(pending) => {
                    let tx = tx.clone();
                    tokio::task::spawn_blocking(move || {
                        let result = prepare(&pending.basis, &pending.event);
                        let _ = tx.send(Input::Computed { pending, result });
                    });
                    continue;
                }
            },
            Input::Computed { pending, result } => hub.finish(&pending, result),
        };
        route(&clients, outgoing);
    }
}

fn route(clients: &BTreeMap<String, mpsc::UnboundedSender<String>>, outgoing: Vec<Outgoing>) {
    for out in outgoing {
        let text = out.message.to_json();
        match &out.to {
            Recipients::All => {
                for tx in clients.values() {
                    let _ = tx.send(text.clone());
                }
            }
            Recipients::Client(id) => {
                if let Some(tx) = clients.get(id) {
                    let _ = tx.send(text);
                }
            }
        }
    }
}

async fn ws_handler(ws: WebSocketUpgrade, State(shared): State<Shared>) -> impl IntoResponse {
    ws.on_upgrade(move |socket| connection(socket, shared))
}

async fn connection(socket: WebSocket, shared: Shared) {
    let client = format!("c{}", shared.next_client.fetch_add(1, Ordering::Relaxed));
    let (mut sink, mut stream) = socket.split();
    let (tx, mut rx) = mpsc::unbounded_channel::<String>();
    if shared
        .actor
        .send(Input::Connect {
            client: client.clone(),
            tx,
        })
        .is_err()
    {
        return;
    }
    let writer = tokio::spawn(async move {
        while let Some(text) = rx.recv().await {
            if sink.send(Message::Text(text.into())).await.is_err() {
                break;
            }
        }
    });
    while let Some(Ok(msg)) = stream.next().await {
        let text = match msg {
            Message::Text(t) => t.as_str().to_owned(),
            Message::Binary(b) => String::from_utf8_lossy(&b).into_owned(),
            Message::Close(_) => break,
            _ => continue,
        };
        if shared
            .actor
            .send(Input::Text {
                client: client.clone(),
                text,
            })
            .is_err()
        {
            break;
        }
    }
    let _ = shared.actor.send(Input::Disconnect { client });
    writer.abort();
}

/// Serves the session protocol on `/ws` (and `/`) until the listener fails.
pub async fn serve(listener: TcpListener, hub: Hub) -> std::io::Result<()> {
    let (tx, rx) = mpsc::unbounded_channel();
    tokio::spawn(run_actor(hub, rx, tx.clone()));
    let shared = Shared {
        actor: tx,
        next_client: Arc::new(AtomicU64::new(0)),
    };
    let app = Router::new()
        .route("/ws", get(ws_handler))
        .route("/", get(ws_handler))
        .with_state(shared);
    axum::serve(listener, app).await
}

pub async fn bind(port: u16) -> std::io::Result<TcpListener> {
    TcpListener::bind(SocketAddr::from(([0, 0, 0, 0], port))).await
}

/// Message a client would send to say hello.
pub fn hello() -> String {
    serde_json::to_string(&ClientMessage::new("hello", serde_json::Value::Null))
        .expect("hello serializes")
}
