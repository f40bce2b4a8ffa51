//! `qcap`: capacity sweeps, degradability scans, certificate checks and spin
//! alignment searches. Output is TSV with `#` header lines.

mod commands;
mod config;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::FileConfig;

/// Environment variable holding the default worker count.
pub const WORKERS_ENV: &str = "QCAP_WORKERS";

#[derive(Parser, Debug)]
#[command(
    name = "qcap",
    version,
    about = "Capacity bounds and degradability of small quantum channels"
)]
struct Cli {
    #[command(flatten)]
    common: CommonArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct CommonArgs {
    /// Base seed; per-cell seeds are derived from it.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (does not change the output).
    #[arg(long, global = true, env = WORKERS_ENV)]
    pub workers: Option<usize>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// JSON config file; flags override its fields.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Random restarts per optimization.
    #[arg(long, global = true)]
    pub restarts: Option<usize>,
    /// Interior-point stopping tolerance.
    #[arg(long, global = true)]
    pub sdp_tol: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Capacity bounds along a one-parameter family of channels.
    Sweep(SweepArgs),
    /// dg, adg and the Gram criterion for W(s, mu) over a grid of mu.
    Degradability(DegradabilityArgs),
    /// Entropy minimization searches for the spin alignment conjecture.
    Spinalign(SpinalignArgs),
    /// Check the analytic SDP certificates and channel invariants.
    Verify(VerifyArgs),
    /// Dimensions, invariants and optionally capacity estimates of one channel.
    ChannelInfo(ChannelInfoArgs),
}

#[derive(Args, Debug, Clone)]
pub struct SweepArgs {
    /// Channel template, e.g. `Ns` or `W:s=0.5`.
    #[arg(long)]
    pub channel: Option<String>,
    /// Parameter filled in from the grid, e.g. `s` or `mu`.
    #[arg(long)]
    pub param: Option<String>,
    /// `start:stop:step` or a comma-separated list.
    #[arg(long)]
    pub grid: Option<String>,
    /// Levels of the private upper bound program.
    #[arg(long)]
    pub levels: Option<u32>,
}

#[derive(Args, Debug, Clone)]
pub struct DegradabilityArgs {
    #[arg(long)]
    pub grid: Option<String>,
    /// The `s` of W(s, mu); the Gram column uses the closed form only at 1/2.
    #[arg(long)]
    pub s: Option<f64>,
}

#[derive(Args, Debug, Clone)]
pub struct SpinalignArgs {
    /// Instance file (records start with an `n=` line).
    #[arg(long, conflicts_with = "random")]
    pub instances: Option<PathBuf>,
    /// Number of random instances.
    #[arg(long)]
    pub random: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub s: Option<f64>,
    /// Where replay files of counterexamples go (default: next to the output).
    #[arg(long)]
    pub replay_dir: Option<PathBuf>,
    /// Skip the particle swarm stage.
    #[arg(long)]
    pub no_swarm: bool,
    /// Agreement tolerance reported in the `converged` column.
    #[arg(long)]
    pub tolerance: Option<f64>,
}

#[derive(Args, Debug, Clone)]
pub struct VerifyArgs {
    /// `Ns` or `Md`.
    pub family: String,
    #[arg(long)]
    pub s: Option<f64>,
    #[arg(long)]
    pub d: Option<usize>,
}

#[derive(Args, Debug, Clone)]
pub struct ChannelInfoArgs {
    /// Channel spec, e.g. `Ns:s=0.3`, `Md:d=4`, `O:mu=0.3,0.5,0.81`, `W:s=0.5,mu=0.3`.
    pub spec: String,
    /// Also compute every capacity estimate and bound.
    #[arg(long)]
    pub report: bool,
}

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub const VALIDATION: u8 = 2;
    pub const NUMERICAL: u8 = 3;
    pub const COUNTEREXAMPLE: u8 = 4;

    pub fn validation(message: impl Into<String>) -> Self {
        CliError {
            code: Self::VALIDATION,
            message: message.into(),
        }
    }

    pub fn numerical(message: impl Into<String>) -> Self {
        CliError {
            code: Self::NUMERICAL,
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<qcap::Error> for CliError {
    fn from(e: qcap::Error) -> Self {
        use qcap::Error::*;
        let code = match e {
            Dimension(_) | InvalidParameter(_) | Unsupported(_) | Parse(_) | Io(_) => {
                Self::VALIDATION
            }
            _ => Self::NUMERICAL,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let file = match &cli.common.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let common = commands::Common::resolve(&cli.common, &file)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(common.workers)
        .build()
        .map_err(|e| CliError::validation(format!("worker pool: {e}")))?;
    pool.install(|| match &cli.command {
        Command::Sweep(a) => commands::sweep(&common, &file, a),
        Command::Degradability(a) => commands::degradability(&common, &file, a),
        Command::Spinalign(a) => commands::spinalign(&common, &file, a),
        Command::Verify(a) => commands::verify(&common, a),
        Command::ChannelInfo(a) => commands::channel_info(&common, a),
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                CliError::VALIDATION
            } else {
                0
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}
