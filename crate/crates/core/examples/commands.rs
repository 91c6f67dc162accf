//! Parsing spoken-style commands, canonical printing, error suggestions and
//! lowering onto session events through the message hub.

use linked_eda::command::{parse_command, print_command};
use linked_eda::data::Dataset;
use linked_eda::session::{
    ClientMessage, CommandContext, Hub, Session, SessionState, DEFAULT_SLOT_COUNT,
};
use serde_json::Value;

fn main() -> linked_eda::Result<()> {
    let rows: Vec<Vec<Option<f64>>> = (0..40)
        .map(|i| {
            vec![
                Some((i % 4) as f64 * 3.0 + (i as f64).sin()),
                Some((i * 7 % 9) as f64),
                Some(i as f64),
            ]
        })
        .collect();
    let data = Dataset::from_numeric_rows(&["Steps", "sleep hours", "age"], &rows)?;

    let inputs = [
        "Show projection view on screen number three.",
        "load clustering view on screens 4, 5 and 6",
        "apply agglomerative clustering with four clusters to solution 0",
        "Apply PCA projection with 2 dimensions to solution 0",
        "apply cmds projection with 2 dimensions using manhattan metric to solution 1",
        "extend clustering view to 4 screens",
        "try decreasing the `sleep hours` value of this data point by 1.5",
        "filter solution 0 where Steps > 3 and (age < 10 or `sleep hours` >= 6)",
        "apply kmeens clustering with 3 clusters to solution 0",
        "show projection view on that screen",
        "filter solution 0 where stpes > 3",
    ];
    for text in inputs {
        match parse_command(text, Some(&data)) {
            Ok(cmd) => println!("ok    {text:?}\n   -> {}", print_command(&cmd)),
            Err(e) => println!("error {text:?}\n   -> at {}: {e}", e.offset()),
        }
    }

    let mut hub = Hub::new(Session::new(SessionState::new(
        Some(data),
        DEFAULT_SLOT_COUNT,
    )?));
    hub.receive_blocking("table", ClientMessage::new("create_solution", Value::Null));
    for text in [
        "apply kmeans clustering with 3 clusters to solution 0",
        "show clustering view on screens 1 and 2",
        "extend clustering view to 4 screens",
    ] {
        let msg = ClientMessage::command(text, CommandContext::default()).on(0);
        for out in hub.receive_blocking("alice", msg) {
            let p = &out.message.payload;
            println!(
                "{:?} -> {:?} rev {} {}",
                text,
                out.message.kind,
                out.message.revision,
                p.get("event_type")
                    .or(p.get("message"))
                    .unwrap_or(&Value::Null)
            );
        }
    }
    let views: Vec<_> = hub
        .session()
        .state()
        .views()
        .map(|v| (v.kind, v.slots.clone()))
        .collect();
    println!("views now {views:?}");
    Ok(())
}
