//! `boltzlab`: command-line runner for the Fourier-space Boltzmann solver.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use boltzmann_fourier::Error;
use clap::{Args, Parser, Subcommand};

/// Environment variable holding the worker-thread count.
pub const THREADS_ENV: &str = "BOLTZLAB_THREADS";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("assertion failed: {0}")]
    Assertion(String),
    #[error(transparent)]
    Core(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Assertion(_) => 1,
            CliError::Core(e) => match e {
                Error::Usage(_) | Error::Domain(_) | Error::Json(_) | Error::Io(_) => 2,
                Error::Validation(_) => 1,
                Error::NonConvergence { .. } | Error::Instability(_) => 3,
            },
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "boltzlab", about = "Fourier-space homogeneous Boltzmann solver with a Debye-Yukawa angular kernel", disable_version_flag = true)]
pub struct Cli {
    /// Print the crate and artifact format versions.
    #[arg(long, global = true)]
    pub version: bool,
    /// Double every quadrature resolution (panels, nodes, azimuth, scalar rule).
    #[arg(long, global = true)]
    pub oracle: bool,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate the kernel moment identity, optionally with a_eps and lambda_{eps,alpha}.
    Moments(MomentsArgs),
    /// Print the grazing-cap split of the collision integral at one frequency.
    Probe(ProbeArgs),
    /// Evolve a measure and write the trajectory.
    Evolve(EvolveArgs),
    /// Paired runs checked against the exponential stability envelope.
    Stability(StabilityArgs),
    /// Successive differences over a schedule of cutoff levels.
    CutoffSweep(SweepArgs),
    /// Coercivity constant of a recorded trajectory.
    Coercivity(TrajectoryArgs),
    /// Weighted-norm smoothing trace of a recorded trajectory.
    Smoothing(SmoothingArgs),
    /// Run the worked example end to end.
    Example(ExampleArgs),
}

#[derive(Debug, Args)]
pub struct MomentsArgs {
    /// Kernel exponent; all of 0.5, 1, 2, 4 when omitted.
    #[arg(long)]
    pub s: Option<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0.5,1,2,4")]
    pub alpha_list: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    pub eps_list: Vec<f64>,
    #[arg(long, conflicts_with = "csv")]
    pub json: bool,
    #[arg(long)]
    pub csv: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ProbeArgs {
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub xi: Vec<f64>,
    #[arg(long)]
    pub eps: f64,
    #[arg(long, default_value_t = 2.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    pub s: f64,
    #[arg(long, default_value_t = 1.0)]
    pub strength: f64,
    /// Measure JSON; the example datum when omitted.
    #[arg(long)]
    pub init: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvolveArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub init: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct StabilityArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub init_a: PathBuf,
    #[arg(long)]
    pub init_b: PathBuf,
    #[arg(long)]
    pub alpha: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub init: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrajectoryArgs {
    #[arg(long)]
    pub trajectory_dir: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SmoothingArgs {
    #[arg(long)]
    pub trajectory_dir: PathBuf,
    #[arg(long = "N", default_value_t = 4)]
    pub n: u32,
    #[arg(long, default_value_t = 1e-2)]
    pub delta: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExampleArgs {
    #[arg(long, default_value_t = 4.0)]
    pub radius: f64,
    #[arg(long, default_value_t = 13)]
    pub points: usize,
    #[arg(long, default_value_t = 16.0)]
    pub cutoff: f64,
    #[arg(long, default_value_t = 0.5)]
    pub horizon: f64,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

fn init_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::Config(format!("{THREADS_ENV} must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("cannot start {n} worker threads: {e}")))
}

fn run(cli: Cli) -> Result<(), CliError> {
    if cli.version {
        println!("boltzlab {} (artifact format version {})", env!("CARGO_PKG_VERSION"), boltzmann_fourier::FORMAT_VERSION);
        return Ok(());
    }
    let Some(command) = cli.command else {
        return Err(CliError::Config("no subcommand given; see --help".into()));
    };
    init_threads()?;
    commands::dispatch(command, cli.oracle)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("boltzlab: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_error_class() {
        assert_eq!(CliError::Config("x".into()).exit_code(), 2);
        assert_eq!(CliError::Assertion("x".into()).exit_code(), 1);
        assert_eq!(CliError::from(Error::Usage("x".into())).exit_code(), 2);
        assert_eq!(CliError::from(Error::Domain("x".into())).exit_code(), 2);
        assert_eq!(CliError::from(Error::Validation("x".into())).exit_code(), 1);
        assert_eq!(CliError::from(Error::Instability("x".into())).exit_code(), 3);
        let nc = Error::NonConvergence { what: "x".into(), estimate: 1.0 };
        assert_eq!(CliError::from(nc).exit_code(), 3);
        let io = std::io::Error::new(std::io::ErrorKind::NotFound, "gone");
        assert_eq!(CliError::from(Error::from(io)).exit_code(), 2);
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
