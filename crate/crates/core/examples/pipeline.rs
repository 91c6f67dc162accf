//! Batch analysis from a JSON config, then replay of the exported log.
//!
//! Pass a directory to keep the artifacts; a temporary one is used otherwise.

use std::fs;
use std::path::PathBuf;

use linked_eda::pipeline::{run_analyze, run_replay, PipelineConfig};

const CONFIG: &str = r#"{
  "dataset": "wellness.csv",
  "seed": 42,
  "steps": [
    {"step": "filter", "filter": "age >= 25"},
    {"step": "enable_features", "features": ["steps", "sleep", "resting_hr"]},
    {"step": "cluster", "algorithm": "kmeans", "k": 3},
    {"step": "project", "algorithm": "pca", "dims": 2},
    {"step": "significance", "method": "anova"},
    {"step": "rank", "method": "anova"}
  ]
}"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let keep = std::env::args().nth(1).map(PathBuf::from);
    let scratch = std::env::temp_dir().join(format!("linked-eda-pipeline-{}", std::process::id()));
    let root = keep.clone().unwrap_or(scratch);
    fs::create_dir_all(&root)?;

    let mut csv = String::from("id,age,steps,sleep,resting_hr\n");
    for i in 0..120 {
        let profile = i % 3;
        let wobble = ((i * 37) % 17) as f64 / 17.0;
        csv.push_str(&format!(
            "{i},{},{},{:.2},{}\n",
            20 + (i * 13) % 50,
            4000 + profile * 4000 + (wobble * 900.0) as usize,
            6.0 + profile as f64 * 0.8 + wobble,
            72 - profile * 8 + (i % 5)
        ));
    }
    fs::write(root.join("wellness.csv"), csv)?;
    fs::write(root.join("config.json"), CONFIG)?;

    let config = PipelineConfig::read(root.join("config.json"))?;
    let analyzed = root.join("analyzed");
    let report = run_analyze(&config, &analyzed)?;
    for path in &report.artifacts {
        println!(
            "{:>8} bytes  {}",
            fs::metadata(path)?.len(),
            path.strip_prefix(&root)?.display()
        );
    }

    let ranking: serde_json::Value =
        serde_json::from_slice(&fs::read(analyzed.join("step_05_rank.json"))?)?;
    let names: Vec<&str> = ranking["entries"]
        .as_array()
        .unwrap()
        .iter()
        .filter_map(|e| e["name"].as_str())
        .collect();
    println!("features by ANOVA F: {names:?}");

    let replayed = root.join("replayed");
    run_replay(&analyzed.join("events.json"), &replayed)?;
    let same =
        fs::read(analyzed.join("snapshot.json"))? == fs::read(replayed.join("snapshot.json"))?;
    println!("replayed snapshot is byte-identical: {same}");

    if keep.is_none() {
        fs::remove_dir_all(&root)?;
    }
    Ok(())
}
