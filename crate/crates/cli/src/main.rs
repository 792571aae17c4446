mod commands;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use cpi_core::material::MaterialLibrary;
use cpi_core::Error;

/// Environment variable naming a materials file to use instead of the built-in one.
pub const MATERIALS_ENV: &str = "CPI_MATERIALS";

#[derive(Parser, Debug)]
#[command(name = "cpi-lab", version, about = "Chirped-pulse interferometry simulation lab")]
struct Cli {
    /// Worker threads for scan points (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct RunArgs {
    /// Experiment config (TOML).
    #[arg(long)]
    pub config: PathBuf,
    /// CSV output path.
    #[arg(long)]
    pub out: PathBuf,
    /// Also write a gnuplot script next to the CSV.
    #[arg(long)]
    pub gnuplot: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Chirped-pulse interference dip.
    CpiDip(RunArgs),
    /// Unfiltered sum-frequency spectrum against stage position.
    SpectrumMap(RunArgs),
    /// White-light interference fringes of the chirped pulse.
    Wli(RunArgs),
    /// Two-photon coincidence dip for the equivalent photon pairs.
    HomDip(RunArgs),
    /// Fitted dip visibility for each sample transmission.
    LossSweep(RunArgs),
    /// Fit a Gaussian dip to an existing trace CSV.
    Fit {
        #[arg(long)]
        input: PathBuf,
        /// Detector bias to subtract before the corrected fit.
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        bias: f64,
        /// Optional CSV of the bias-corrected trace.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        gnuplot: bool,
    },
    /// Group delay and dispersion of the configured sample stack.
    GroupDelay {
        #[arg(long)]
        config: PathBuf,
        /// Optional CSV of group delay across the band.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        gnuplot: bool,
    },
}

/// Why a run failed, mapped onto the process exit code.
#[derive(Debug)]
pub enum Failure {
    Core(Error),
    /// Outputs were written but the fit did not converge.
    NotConverged(serde_json::Value),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

fn materials() -> Result<MaterialLibrary, Error> {
    match std::env::var_os(MATERIALS_ENV) {
        Some(path) => MaterialLibrary::load(path.as_ref()),
        None => Ok(MaterialLibrary::builtin()),
    }
}

fn run(cli: Cli) -> Result<serde_json::Value, Failure> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    }
    match cli.command {
        Command::CpiDip(a) => commands::cpi_dip(&a, &materials()?),
        Command::SpectrumMap(a) => commands::spectrum_map(&a, &materials()?),
        Command::Wli(a) => commands::wli(&a, &materials()?),
        Command::HomDip(a) => commands::hom_dip(&a, &materials()?),
        Command::LossSweep(a) => commands::loss_sweep(&a, &materials()?),
        Command::Fit {
            input,
            bias,
            out,
            gnuplot,
        } => commands::fit(&input, bias, out.as_deref(), gnuplot),
        Command::GroupDelay { config, out, gnuplot } => {
            commands::group_delay(&config, out.as_deref(), gnuplot, &materials()?)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(summary) => {
            println!(
                "{}",
                serde_json::to_string_pretty(&summary).expect("summary serialises")
            );
            ExitCode::SUCCESS
        }
        Err(Failure::NotConverged(summary)) => {
            println!(
                "{}",
                serde_json::to_string_pretty(&summary).expect("summary serialises")
            );
            eprintln!("error: fit did not converge");
            ExitCode::from(3)
        }
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            match e {
                Error::Io(_) | Error::Csv(_) => ExitCode::from(1),
                e if e.is_config_error() => ExitCode::from(2),
                _ => ExitCode::from(3),
            }
        }
    }
}
