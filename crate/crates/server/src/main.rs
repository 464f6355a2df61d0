use std::net::SocketAddr;
use std::process::ExitCode;
use std::time::Duration;

use clap::Parser;
use p4lab_server::{serve_blocking, ServerConfig, DEFAULT_LISTEN};

/// HTTP API for the p4lab explorer.
#[derive(Debug, Parser)]
#[command(version)]
struct Args {
    #[arg(long, default_value = DEFAULT_LISTEN)]
    listen: SocketAddr,
    /// Per-request compute budget in milliseconds.
    #[arg(long, default_value_t = 2000)]
    budget_ms: u64,
    /// Allowed CORS origin; repeatable. Any origin when omitted.
    #[arg(long = "cors-origin")]
    cors_origins: Vec<String>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let config = ServerConfig {
        budget: Duration::from_millis(args.budget_ms),
        cors_origins: args.cors_origins,
    };
    match serve_blocking(args.listen, config) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
