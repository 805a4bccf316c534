//! Command-line harness: configuration, artifact writing and exit-status mapping.

mod artifacts;
mod commands;
pub mod config;

use clap::{Parser, Subcommand};
use config::RunConfig;
use serde::Serialize;
use std::ffi::OsString;
use std::path::PathBuf;

pub use artifacts::Artifacts;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_TREND: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error(transparent)]
    Core(#[from] crownlab_core::Error),
    #[error("checks failed: {}", .0.join(", "))]
    Trend(Vec<String>),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use crownlab_core::Error as E;
        match self {
            CliError::Config(_) | CliError::Io(_) => EXIT_CONFIG,
            CliError::Core(E::InvalidParameter(_) | E::IndexOutOfRange(_)) => EXIT_CONFIG,
            CliError::Core(_) => EXIT_NUMERICAL,
            CliError::Trend(_) => EXIT_TREND,
        }
    }

    fn kind(&self) -> &'static str {
        use crownlab_core::Error as E;
        match self {
            CliError::Config(_) => "config",
            CliError::Io(_) => "io",
            CliError::Core(E::InvalidParameter(_) | E::IndexOutOfRange(_)) => "invalid_parameter",
            CliError::Core(_) => "numerical",
            CliError::Trend(_) => "trend",
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "crownlab", version, about = "Numerical checks for polygonal multi-bubble configurations")]
pub struct Cli {
    /// TOML run configuration; defaults apply to every missing key.
    #[arg(short, long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Command {
    /// Solve the radial ground state and write the profile and tail report.
    GroundState,
    /// Interaction constants of the configured pair.
    Constants,
    /// Monte Carlo versus asymptotic interaction profile at the first center.
    PhiCheck,
    /// Energy expansion convergence table.
    Expansion,
    /// Weighted error-norm decay table.
    ErrorNorm,
    /// Reduced-energy grid and its interior maximizer.
    Landscape,
    /// Scaling covariance of the ansatz and the reduced energy.
    ScalingCheck,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::GroundState => "ground-state",
            Command::Constants => "constants",
            Command::PhiCheck => "phi-check",
            Command::Expansion => "expansion",
            Command::ErrorNorm => "error-norm",
            Command::Landscape => "landscape",
            Command::ScalingCheck => "scaling-check",
        }
    }
}

#[derive(Serialize)]
struct ErrorRecord<'a> {
    error: &'static str,
    message: String,
    exit_code: i32,
    command: Option<&'a str>,
}

fn report(err: &CliError, command: Option<Command>, out: Option<&std::path::Path>) -> i32 {
    let record = ErrorRecord {
        error: err.kind(),
        message: err.to_string(),
        exit_code: err.exit_code(),
        command: command.map(Command::name),
    };
    let json = serde_json::to_string(&record).expect("error record serializes");
    eprintln!("{json}");
    if let Some(dir) = out {
        let _ = std::fs::create_dir_all(dir).and_then(|_| std::fs::write(dir.join("error.json"), format!("{json}\n")));
    }
    record.exit_code
}

/// Parses `args` (program name first), runs the command and returns the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return EXIT_OK;
        }
        Err(e) => return report(&CliError::Config(e.to_string()), None, None),
    };
    let cfg = match cli.config.as_deref().map(RunConfig::load).unwrap_or_else(|| Ok(RunConfig::default())) {
        Ok(c) => c,
        Err(e) => return report(&e, Some(cli.command), None),
    };
    let out = cfg.output.dir.clone();
    match execute(cli.command, &cfg) {
        Ok(()) => {
            let _ = std::fs::remove_file(out.join("error.json"));
            EXIT_OK
        }
        Err(e) => report(&e, Some(cli.command), Some(&out)),
    }
}

/// Runs one command inside a worker pool sized by `mc.threads`.
pub fn execute(command: Command, cfg: &RunConfig) -> Result<(), CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.mc.threads)
        .build()
        .map_err(|e| CliError::Config(format!("worker pool: {e}")))?;
    let art = Artifacts::new(command.name(), cfg)?;
    pool.install(|| match command {
        Command::GroundState => commands::ground_state(cfg, &art),
        Command::Constants => commands::constants(cfg, &art),
        Command::PhiCheck => commands::phi_check(cfg, &art),
        Command::Expansion => commands::expansion(cfg, &art),
        Command::ErrorNorm => commands::error_norm(cfg, &art),
        Command::Landscape => commands::landscape(cfg, &art),
        Command::ScalingCheck => commands::scaling_check(cfg, &art),
    })
}
