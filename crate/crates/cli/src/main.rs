use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use hoffman_cli::{run, Cli};

fn configure_threads() -> Result<(), String> {
    let Ok(value) = std::env::var("HOFFMAN_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| format!("HOFFMAN_THREADS must be a positive integer, got {value:?}"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(msg) = configure_threads() {
        eprintln!("hoffman: {msg}");
        return ExitCode::from(2);
    }
    match run(&cli) {
        Ok(outcome) => {
            let mut text = serde_json::to_string_pretty(&outcome.report).expect("report serializes");
            text.push('\n');
            // One write so the report appears whole or not at all.
            if std::io::stdout().lock().write_all(text.as_bytes()).is_err() {
                return ExitCode::from(1);
            }
            ExitCode::from(outcome.verdict.exit_code())
        }
        Err(e) => {
            eprintln!("hoffman: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
