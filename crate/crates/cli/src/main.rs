//! `mmcov`: simulate, harvest, fit, analytic and compare.
//!
//! Exit status 0 on success, 2 for configuration or argument errors, 3 when a
//! numerical procedure does not converge, 1 for anything else.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use thiserror::Error;

use mmwave_coverage::channel::GainKind;
use mmwave_coverage::exec::{set_worker_threads, Execution};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] mmwave_coverage::Error),
    #[error("{context}: {source}")]
    Io { context: String, source: std::io::Error },
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use mmwave_coverage::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::Core(E::InvalidArgument(_) | E::InvalidParameter { .. } | E::UnsupportedSize { .. }) => 2,
            CliError::Core(e) if e.is_numeric() => 3,
            CliError::Core(E::DegenerateSamples(_)) => 3,
            _ => 1,
        }
    }

    pub fn io(context: impl Into<String>) -> impl FnOnce(std::io::Error) -> CliError {
        let context = context.into();
        move |source| CliError::Io { context, source }
    }
}

#[derive(Debug, Parser)]
#[command(name = "mmcov", version, about = "Coverage of millimeter-wave cellular networks")]
struct Cli {
    /// Worker threads; 1 runs everything sequentially. Results do not depend
    /// on this.
    #[arg(long, global = true, env = "MMCOV_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum KindArg {
    Aligned,
    Misaligned,
}

impl From<KindArg> for GainKind {
    fn from(k: KindArg) -> GainKind {
        match k {
            KindArg::Aligned => GainKind::Aligned,
            KindArg::Misaligned => GainKind::Misaligned,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Monte Carlo coverage curve.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `output_dir` from the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Aligned or misaligned gain samples.
    Harvest {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum)]
        kind: KindArg,
        /// Overrides `harvest.n_samples`.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fits gain families to a corpus and ranks them by RMSE.
    Fit {
        #[arg(long)]
        corpus: PathBuf,
        /// Families and binning come from `[fit]` of this config if given.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Comma-separated family list, overriding the config.
        #[arg(long, value_delimiter = ',')]
        families: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Semi-analytic coverage curve.
    Analytic {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
        prop: u8,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Maximum absolute gap between two coverage curves.
    Compare {
        curve_a: PathBuf,
        curve_b: PathBuf,
        /// Also write the report here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    let exec = match cli.threads {
        Some(1) => Execution::Sequential,
        Some(n) => {
            set_worker_threads(n).map_err(|e| CliError::Config(format!("--threads / MMCOV_THREADS: {e}")))?;
            Execution::Parallel
        }
        None => Execution::Parallel,
    };
    match cli.command {
        Command::Simulate { config, out } => commands::simulate(&config, out, exec),
        Command::Harvest { config, kind, n, out } => commands::harvest(&config, kind.into(), n, out, exec),
        Command::Fit { corpus, config, families, out } => commands::fit(&corpus, config.as_deref(), &families, out),
        Command::Analytic { config, prop, out } => commands::analytic(&config, prop, out, exec),
        Command::Compare { curve_a, curve_b, out } => commands::compare(&curve_a, &curve_b, out.as_deref()),
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
