use std::io::Write;

use clap::Parser;
use isoparam_cli::{run, Cli, RunConfig, EXIT_CONFIG};

fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("ISOPARAM_THREADS") else { return Ok(()) };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| format!("ISOPARAM_THREADS must be a positive integer, got {raw:?}"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() {
    let cli = Cli::parse();
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        std::process::exit(EXIT_CONFIG);
    }
    let config = RunConfig::from(cli.command);
    let outcome = run(&config);
    // A closed pipe on either stream is not an error worth reporting.
    let text = serde_json::to_string_pretty(&outcome.report).expect("serializable");
    let _ = writeln!(std::io::stdout().lock(), "{text}");
    let _ = write!(std::io::stderr().lock(), "{}", outcome.summary);
    std::process::exit(outcome.exit_code);
}
