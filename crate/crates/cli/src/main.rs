//! `p4lab`: integrate, classify, bisect, sweep and transform solutions from the
//! command line, or launch the HTTP API.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage error.

mod commands;
mod config;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use config::RunArgs;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn runtime(e: impl std::fmt::Display) -> Self {
        CliError::Runtime(e.to_string())
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "p4lab",
    version,
    about = "Numerical lab for the real fourth Painlevé equation with zero parameters"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate one initial value problem and write the trajectory.
    Integrate {
        #[command(flatten)]
        run: RunArgs,
        /// Downsample to at most this many points, keeping endpoints and extrema.
        #[arg(long)]
        max_samples: Option<usize>,
    },
    /// Classify the long-time behaviour over the integration span.
    Classify {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Bisect the initial slope between two differently classified values.
    Bisect {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, allow_negative_numbers = true)]
        lo: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        hi: Option<f64>,
        /// Final bracket width [default: 1e-10].
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Classify a list or grid of initial slopes.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        grid: SweepGrid,
    },
    /// Sample the guide curves σ = 0, ±√(-2t/3), ±√(-2t) for plotting.
    Regions {
        #[arg(long, allow_negative_numbers = true, default_value_t = -10.0)]
        tmin: f64,
        #[arg(long, allow_negative_numbers = true, default_value_t = 1.0)]
        tmax: f64,
        #[arg(long, default_value_t = 500)]
        n: usize,
        #[arg(long, value_enum)]
        format: Option<config::Format>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Apply a square, square root or symmetry to a stored trajectory.
    Transform {
        /// Trajectory document (JSON); `-` reads standard input.
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        op: TransformOp,
        /// Sign left of the zero for `signed-sqrt`.
        #[arg(long, value_enum, default_value_t = SignArg::Minus)]
        left_sign: SignArg,
        #[arg(long, value_enum)]
        format: Option<config::Format>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Locate zeros and check the local structure the equation forces there.
    Zeros {
        #[command(flatten)]
        run: RunArgs,
        /// Read a trajectory document instead of integrating.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Run the HTTP API.
    Serve {
        #[arg(long, default_value = p4lab_server::DEFAULT_LISTEN)]
        listen: SocketAddr,
        /// Per-request compute budget in milliseconds.
        #[arg(long, default_value_t = 2000)]
        budget_ms: u64,
        /// Allowed CORS origin; repeatable. Any origin when omitted.
        #[arg(long = "cors-origin")]
        cors_origins: Vec<String>,
    },
}

#[derive(Debug, Clone, Args)]
struct SweepGrid {
    /// Comma-separated slopes.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    values: Vec<f64>,
    /// Uniform grid start (with --vmax and --steps).
    #[arg(long, allow_negative_numbers = true)]
    vmin: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    vmax: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TransformOp {
    Square,
    Sqrt,
    SignedSqrt,
    Negate,
    Reverse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SignArg {
    Minus,
    Plus,
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Integrate { run, max_samples } => {
            commands::integrate(&run.resolve()?, max_samples)
        }
        Command::Classify { run } => commands::classify(&run.resolve()?),
        Command::Bisect { run, lo, hi, tol } => commands::bisect(&run.resolve()?, lo, hi, tol),
        Command::Sweep { run, grid } => {
            let values = grid.values()?;
            commands::sweep(&run.resolve()?, &values)
        }
        Command::Regions {
            tmin,
            tmax,
            n,
            format,
            out,
        } => commands::regions(tmin, tmax, n, format, out),
        Command::Transform {
            input,
            op,
            left_sign,
            format,
            out,
        } => commands::transform(&input, op, left_sign, format, out),
        Command::Zeros { run, input } => commands::zeros(&run.resolve()?, input.as_deref()),
        Command::Serve {
            listen,
            budget_ms,
            cors_origins,
        } => {
            let config = p4lab_server::ServerConfig {
                budget: std::time::Duration::from_millis(budget_ms),
                cors_origins,
            };
            p4lab_server::serve_blocking(listen, config).map_err(CliError::runtime)
        }
    }
}

impl SweepGrid {
    fn values(&self) -> Result<Vec<f64>, CliError> {
        let mut out = self.values.clone();
        match (self.vmin, self.vmax, self.steps) {
            (None, None, None) => {}
            (Some(a), Some(b), Some(n)) if n >= 2 && a < b => {
                out.extend((0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64));
            }
            _ => {
                return Err(CliError::Usage(
                    "--vmin, --vmax and --steps go together, with vmin < vmax and steps >= 2"
                        .into(),
                ))
            }
        }
        if out.is_empty() {
            return Err(CliError::Usage(
                "no slopes given: use --values or --vmin/--vmax/--steps".into(),
            ));
        }
        Ok(out)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
