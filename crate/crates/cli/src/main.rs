//! `lrpeeg` — command-line pipeline for single-trial EEG decoding with
//! relevance explanations.
//!
//! Subcommands cover the full workflow: `synth` (ground-truth data),
//! `preprocess` (decimate → bandpass → epoch → envelope → baseline),
//! `train`, `evaluate` (holdout, leave-one-out, or transfer), `explain`
//! (per-trial relevance decompositions), and `render` (images and scalp
//! grids from relevance CSVs).
//!
//! Exit codes: 0 success, 2 usage/configuration, 3 data, 4 numerical.

mod commands;
mod config;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{resolve_config, Overrides};

/// CLI failure: carries enough structure to choose an exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, bad config file, or missing input files. Exit 2.
    Config(String),
    /// Failure inside the processing library; exit code depends on kind.
    Core(lrpeeg::Error),
}

impl From<lrpeeg::Error> for CliError {
    fn from(e: lrpeeg::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Core(lrpeeg::Error::from(e))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(message) => write!(f, "{message}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use lrpeeg::Error;
        match self {
            CliError::Config(_) => 2,
            CliError::Core(e) => match e {
                // Parameter combinations the user controls.
                Error::Validation(_)
                | Error::Argument(_)
                | Error::Shape(_)
                | Error::UnsupportedRate { .. } => 2,
                Error::Numerical(_) => 4,
                // Everything else is a problem with the data itself.
                _ => 3,
            },
        }
    }
}

#[derive(Parser)]
#[command(
    name = "lrpeeg",
    version,
    about = "Single-trial EEG decoding with relevance explanations"
)]
struct Cli {
    /// JSON file holding a pipeline configuration; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(flatten)]
    overrides: Overrides,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic recording with known discriminative channels.
    Synth(SynthArgs),
    /// Turn a continuous recording into decoder-ready epochs.
    Preprocess,
    /// Fit the selected classifier and save it.
    Train,
    /// Run the selected evaluation protocol and write metrics JSON.
    Evaluate,
    /// Decompose each trial's decision into relevance files and images.
    Explain,
    /// Render a relevance CSV as a heatmap image and/or scalp topography.
    Render(RenderArgs),
}

/// Generator parameters (paths and the seed come from the shared flags).
#[derive(Args)]
struct SynthArgs {
    /// Number of EEG channels.
    #[arg(long, default_value_t = 16)]
    n_channels: usize,
    /// Trials per class.
    #[arg(long, default_value_t = 50)]
    n_trials_per_class: usize,
    /// Carrier amplitude fraction removed on a class's channels (0..=1).
    #[arg(long, default_value_t = 0.7)]
    modulation_depth: f64,
    /// Additive white-noise standard deviation.
    #[arg(long, default_value_t = 0.5)]
    noise_sigma: f64,
    /// Carrier frequency in Hz.
    #[arg(long, default_value_t = 11.0)]
    carrier_hz: f64,
    /// Recording sampling rate in Hz.
    #[arg(long, default_value_t = 100.0)]
    fs: f64,
    /// Comma-separated channel indices carrying the class-0 effect.
    #[arg(long, value_delimiter = ',')]
    class0_channels: Vec<usize>,
    /// Comma-separated channel indices carrying the class-1 effect.
    #[arg(long, value_delimiter = ',')]
    class1_channels: Vec<usize>,
}

/// Rendering inputs and outputs.
#[derive(Args)]
struct RenderArgs {
    /// Relevance CSV to render (as written by `explain`).
    #[arg(long)]
    map: PathBuf,
    /// Write a heatmap PNG here.
    #[arg(long)]
    heatmap: Option<PathBuf>,
    /// Write a scalp topography here (both `<path>.csv` and `<path>.png`).
    #[arg(long)]
    topo: Option<PathBuf>,
    /// Build the topography from the timepoint nearest this instant (ms);
    /// default is the time-averaged map.
    #[arg(long, allow_negative_numbers = true)]
    at_time_ms: Option<f64>,
    /// Topography grid cells per side.
    #[arg(long, default_value_t = 64)]
    grid_size: usize,
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = resolve_config(cli.config.as_deref(), &cli.overrides)?;
    match &cli.command {
        Command::Synth(args) => commands::synth(&cfg, args),
        Command::Preprocess => commands::preprocess(&cfg),
        Command::Train => commands::train(&cfg),
        Command::Evaluate => commands::evaluate(&cfg),
        Command::Explain => commands::explain(&cfg),
        Command::Render(args) => commands::render(&cfg, args),
    }
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
