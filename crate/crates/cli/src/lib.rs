//! Command-line front end for the `morphoseg` library.
//!
//! Every command takes one or more input images, processes them on a worker
//! pool (capped by `MORPHOSEG_THREADS`), and writes its outputs plus a JSON
//! sidecar echoing the parameters into `--out`.

mod commands;
mod inputs;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use morphoseg::{AmrParams, Connectivity};

pub use commands::execute;

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "MORPHOSEG_THREADS";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad flags, unreadable or malformed inputs.
    #[error("{0}")]
    Input(String),
    /// A library invariant failed; indicates a bug rather than bad input.
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Internal(_) => 3,
        }
    }
}

impl From<morphoseg::Error> for CliError {
    fn from(e: morphoseg::Error) -> Self {
        use morphoseg::Error as E;
        match e {
            E::Precondition { .. } | E::IncompletePartition { .. } => CliError::Internal(e.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "morphoseg",
    version,
    about = "Adaptive morphological reconstruction and segmentation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the adaptive reconstruction of each input's gradient as PFM.
    Reconstruct(PipelineArgs),
    /// AMR-WT segmentation into a 16-bit label PNG.
    Segment(SegmentArgs),
    /// One watershed partition per scale cap s..=m, plus a manifest.
    Hierarchy(PipelineArgs),
    /// AMR-SC: AMR-WT pre-segmentation grouped by spectral clustering.
    Spectral(SpectralArgs),
    /// PRI, CV and VI against ground-truth label PNGs, as CSV.
    Eval(EvalArgs),
    /// Write the synthetic test corpus with ground truths.
    Demo(DemoArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConnectivityArg {
    #[value(name = "4")]
    Four,
    #[value(name = "8")]
    Eight,
}

impl From<ConnectivityArg> for Connectivity {
    fn from(c: ConnectivityArg) -> Self {
        match c {
            ConnectivityArg::Four => Connectivity::Four,
            ConnectivityArg::Eight => Connectivity::Eight,
        }
    }
}

/// Where the gradient comes from: Sobel of the input, or a file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GradientSource {
    Sobel,
    File(PathBuf),
}

impl std::str::FromStr for GradientSource {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "sobel" {
            Ok(GradientSource::Sobel)
        } else if s.is_empty() {
            Err("expected 'sobel' or a path".into())
        } else {
            Ok(GradientSource::File(s.into()))
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct AmrArgs {
    /// Smallest disk radius.
    #[arg(long, default_value_t = 2)]
    pub s: usize,
    /// Largest disk radius.
    #[arg(long, default_value_t = 50)]
    pub m: usize,
    /// Early-stop threshold; 0 disables early stopping.
    #[arg(long, default_value_t = 1e-4)]
    pub eta: f64,
    #[arg(long, value_enum, default_value = "8")]
    pub connectivity: ConnectivityArg,
    /// `sobel`, or a PFM/PGM gradient file (single input only).
    #[arg(long, default_value = "sobel")]
    pub gradient: GradientSource,
}

impl AmrArgs {
    pub fn params(&self) -> Result<AmrParams, CliError> {
        Ok(AmrParams::new(self.s, self.m, self.eta)?)
    }
}

#[derive(Debug, Clone, Args)]
pub struct PipelineArgs {
    /// PNG, PGM or PPM images; `.pfm` files are read as gradients.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    #[command(flatten)]
    pub amr: AmrArgs,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct SegmentArgs {
    #[command(flatten)]
    pub pipeline: PipelineArgs,
    /// Also write region boundaries drawn over the input.
    #[arg(long)]
    pub overlay: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SpectralArgs {
    #[command(flatten)]
    pub pipeline: PipelineArgs,
    /// Number of clusters.
    #[arg(long)]
    pub k: usize,
    /// Width of the Gaussian colour affinity, in CIELAB units.
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    /// Seed for k-means++ initialisation.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Also write cluster boundaries drawn over the input.
    #[arg(long)]
    pub overlay: bool,
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    /// Label PNGs, or images when `--segment` is given.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    /// Ground-truth directory: `<gt>/<stem>/*.png` or `<gt>/<stem>_gt*.png`.
    #[arg(long)]
    pub gt: PathBuf,
    /// Segment the inputs with AMR-WT before scoring.
    #[arg(long)]
    pub segment: bool,
    #[command(flatten)]
    pub amr: AmrArgs,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct DemoArgs {
    /// Seed for the colour noise.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "demo")]
    pub out: PathBuf,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> Result<(), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| CliError::Input(e.to_string()))?;
    execute(&cli)
}
