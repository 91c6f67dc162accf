//! Two websocket clients sharing one session.
//!
//! `cargo run --example server -- 8080` keeps serving on that port instead.

use futures::{SinkExt, StreamExt};
use linked_eda::data::Dataset;
use linked_eda::server::{bind, hello, serve};
use linked_eda::session::{
    ClientMessage, CommandContext, Hub, Session, SessionState, DEFAULT_SLOT_COUNT,
};
use serde_json::Value;
use tokio::net::TcpListener;
use tokio_tungstenite::tungstenite::Message;

fn hub() -> linked_eda::Result<Hub> {
    let rows: Vec<Vec<Option<f64>>> = (0..60)
        .map(|i| {
            vec![
                Some((i % 2) as f64 * 4.0 + (i as f64).sin()),
                Some((i as f64).cos()),
            ]
        })
        .collect();
    let state = SessionState::new(
        Some(Dataset::from_numeric_rows(&["x", "y"], &rows)?),
        DEFAULT_SLOT_COUNT,
    )?;
    let mut hub = Hub::new(Session::new(state));
    hub.receive_blocking("server", ClientMessage::new("create_solution", Value::Null));
    Ok(hub)
}

#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error>> {
    if let Some(port) = std::env::args().nth(1) {
        let listener = bind(port.parse()?).await?;
        println!("serving on ws://{}/ws", listener.local_addr()?);
        return Ok(serve(listener, hub()?).await?);
    }

    let listener = TcpListener::bind("127.0.0.1:0").await?;
    let url = format!("ws://{}/ws", listener.local_addr()?);
    tokio::spawn(serve(listener, hub()?));

    let (mut alice, _) = tokio_tungstenite::connect_async(&url).await?;
    let (mut bob, _) = tokio_tungstenite::connect_async(&url).await?;
    for ws in [&mut alice, &mut bob] {
        ws.send(Message::text(hello())).await?;
    }

    let command = ClientMessage::command(
        "apply kmeans clustering with 2 clusters to solution 0",
        CommandContext::default(),
    );
    alice
        .send(Message::text(serde_json::to_string(&command.with_seq(1))?))
        .await?;

    for (name, ws) in [("alice", &mut alice), ("bob", &mut bob)] {
        for _ in 0..2 {
            let Some(Ok(Message::Text(text))) = ws.next().await else {
                break;
            };
            let msg: Value = serde_json::from_str(text.as_str())?;
            let detail = match msg["type"].as_str() {
                Some("snapshot") => format!(
                    "{} solution(s)",
                    msg["payload"]["snapshot"]["solutions"]
                        .as_array()
                        .map_or(0, Vec::len)
                ),
                _ => format!(
                    "{} from {}: {}",
                    msg["payload"]["event_type"],
                    msg["payload"]["client_id"],
                    msg["payload"]["command"]
                ),
            };
            println!(
                "{name:<5} <- {} rev {}: {detail}",
                msg["type"], msg["revision"]
            );
        }
    }
    Ok(())
}
