use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use linked_eda::pipeline::{exit_code, run_analyze, run_replay, PipelineConfig};
use linked_eda::server::{bind, initial_hub, serve};
use linked_eda::session::DEFAULT_SLOT_COUNT;

#[derive(Parser)]
#[command(
    name = "linked-eda",
    version,
    about = "Collaborative exploratory data analysis engine"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Serve the session protocol over websockets.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        /// CSV preloaded as solution 0.
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_SLOT_COUNT)]
        slots: usize,
    },
    /// Run a pipeline config and write JSON artifacts.
    Analyze {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the config seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Replay an exported event log and write the resulting artifacts.
    Replay {
        #[arg(long)]
        log: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn fail(code: i32, message: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {message}");
    ExitCode::from(code as u8)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match Cli::parse().command {
        Cmd::Serve { port, data, slots } => {
            let hub = match initial_hub(data.as_ref(), slots) {
                Ok(h) => h,
                Err(e) => return fail(exit_code(&e), e),
            };
            let runtime = tokio::runtime::Runtime::new().expect("tokio runtime");
            runtime.block_on(async {
                let listener = match bind(port).await {
                    Ok(l) => l,
                    Err(e) => return fail(3, format!("cannot bind port {port}: {e}")),
                };
                log::info!(
                    "listening on {}",
                    listener
                        .local_addr()
                        .map(|a| a.to_string())
                        .unwrap_or_default()
                );
                match serve(listener, hub).await {
                    Ok(()) => ExitCode::SUCCESS,
                    Err(e) => fail(3, e),
                }
            })
        }
        Cmd::Analyze { config, out, seed } => {
            let result = PipelineConfig::read(&config).and_then(|mut cfg| {
                if seed.is_some() {
                    cfg.seed = seed;
                }
                run_analyze(&cfg, &out)
            });
            match result {
                Ok(report) => {
                    println!(
                        "wrote {} artifacts to {}",
                        report.artifacts.len(),
                        out.display()
                    );
                    ExitCode::SUCCESS
                }
                Err(e) => fail(exit_code(&e), e),
            }
        }
        Cmd::Replay { log, out } => match run_replay(&log, &out) {
            Ok(report) => {
                println!(
                    "wrote {} artifacts to {}",
                    report.artifacts.len(),
                    out.display()
                );
                ExitCode::SUCCESS
            }
            Err(e) => fail(exit_code(&e), e),
        },
    }
}
