//! Command-line flags. Every per-command flag is optional so that values
//! left unset can come from the config file or the defaults.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use mpgfrft::compression::GridMetric;
use mpgfrft::graph::ShiftKind;
use mpgfrft::spectral::TransformKind;
use serde::Serialize;

use crate::config::{CompressMethod, FilterChoice, Objective, OutputFormat, Span, Tying};

#[derive(Debug, Parser)]
#[command(name = "mpgfrft", version, about = "Multiple-parameter graph fractional Fourier transforms")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Seed for every random draw.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for block and group parallelism.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// JSON file with global settings and one section per command.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub output_format: Option<OutputFormat>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Truncation compression of CSV signals or image blocks.
    Compress(CompressArgs),
    /// Per-block learned filtering of a noisy image against its clean reference.
    Denoise(DenoiseArgs),
    /// Writes a random cipher key.
    Keygen(KeygenArgs),
    /// Encrypts an RGB image into an .mpgc file.
    Encrypt(EncryptArgs),
    /// Decrypts an .mpgc file back to an image.
    Decrypt(DecryptArgs),
    /// Trains stacked type-I layers towards a target transform.
    LearnTransform(LearnTransformArgs),
    /// Trains an order vector for denoising or compression of one signal.
    LearnOrders(LearnOrdersArgs),
    /// Adjacent-pixel correlation of an image or a ciphertext rendering.
    AnalyzeCorrelation(CorrelationArgs),
    /// Decryption MSE as the orders are offset by each delta.
    Sensitivity(SensitivityArgs),
    /// Runs the built-in invariant suites.
    Selftest,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Compress(_) => "compress",
            Command::Denoise(_) => "denoise",
            Command::Keygen(_) => "keygen",
            Command::Encrypt(_) => "encrypt",
            Command::Decrypt(_) => "decrypt",
            Command::LearnTransform(_) => "learn-transform",
            Command::LearnOrders(_) => "learn-orders",
            Command::AnalyzeCorrelation(_) => "analyze-correlation",
            Command::Sensitivity(_) => "sensitivity",
            Command::Selftest => "selftest",
        }
    }
}

fn parse_kind(s: &str) -> Result<TransformKind, String> {
    s.parse().map_err(|e: mpgfrft::Error| e.to_string())
}

fn parse_shift(s: &str) -> Result<ShiftKind, String> {
    s.parse().map_err(|e: mpgfrft::Error| e.to_string())
}

fn parse_metric(s: &str) -> Result<GridMetric, String> {
    match s {
        "re" => Ok(GridMetric::Re),
        "nrms" => Ok(GridMetric::Nrms),
        "cc" => Ok(GridMetric::Cc),
        other => Err(format!("unknown metric '{other}'")),
    }
}

fn parse_span(s: &str) -> Result<Span, String> {
    s.parse()
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct CompressArgs {
    /// Signal CSV (one signal per column) or PNG/PPM/PGM image.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub ratio: Option<f64>,
    #[arg(long, value_enum)]
    pub method: Option<CompressMethod>,
    /// Order blocks for the grid search.
    #[arg(long)]
    pub blocks: Option<usize>,
    /// gfrft, i or ii.
    #[arg(long, value_parser = parse_kind)]
    pub kind: Option<TransformKind>,
    /// Block order values for the fixed method, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub orders: Option<Vec<f64>>,
    /// Graph as adjacency CSV or JSON descriptor; default is a seeded sensor graph.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    #[arg(long, value_parser = parse_shift)]
    pub shift: Option<ShiftKind>,
    /// Side of the square image blocks.
    #[arg(long)]
    pub block: Option<usize>,
    /// Only this CSV column (0-based).
    #[arg(long)]
    pub column: Option<usize>,
    /// Grid values as lo:hi:step.
    #[arg(long, value_parser = parse_span)]
    pub grid: Option<Span>,
    #[arg(long, value_parser = parse_metric)]
    pub metric: Option<GridMetric>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub init_order: Option<f64>,
    /// JSON report path.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Reconstruction (CSV or image, matching the input).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct DenoiseArgs {
    #[arg(long)]
    pub noisy: Option<PathBuf>,
    #[arg(long)]
    pub clean: Option<PathBuf>,
    /// Synthesize the noisy image from the clean one with this sigma.
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub block: Option<usize>,
    #[arg(long)]
    pub knn: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long, value_parser = parse_kind)]
    pub kind: Option<TransformKind>,
    #[arg(long)]
    pub init_order: Option<f64>,
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct KeygenArgs {
    #[arg(long, value_parser = parse_kind)]
    pub kind: Option<TransformKind>,
    #[arg(long)]
    pub group_size: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct EncryptArgs {
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub key: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write the magnitude rendering of the ciphertext.
    #[arg(long)]
    pub preview: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct DecryptArgs {
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub key: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct CorrelationArgs {
    /// Image, or an .mpgc ciphertext rendered by magnitude (needs --key).
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub key: Option<PathBuf>,
    #[arg(long)]
    pub pairs: Option<usize>,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct SensitivityArgs {
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub key: Option<PathBuf>,
    /// lo:hi:step
    #[arg(long, value_parser = parse_span, allow_hyphen_values = true)]
    pub delta_range: Option<Span>,
    /// Tidy CSV of (delta, mse).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct LearnTransformArgs {
    #[arg(long)]
    pub graph: Option<PathBuf>,
    /// Size of the generated graph when --graph is absent.
    #[arg(long)]
    pub nodes: Option<usize>,
    /// cycle, sensor, random or grid.
    #[arg(long)]
    pub graph_kind: Option<String>,
    #[arg(long, value_parser = parse_shift)]
    pub shift: Option<ShiftKind>,
    /// Input signal CSV; a seeded random signal otherwise.
    #[arg(long)]
    pub signal: Option<PathBuf>,
    #[arg(long)]
    pub column: Option<usize>,
    #[arg(long, value_parser = parse_kind)]
    pub kind: Option<TransformKind>,
    /// Target block orders, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub target: Option<Vec<f64>>,
    #[arg(long)]
    pub layers: Option<usize>,
    /// Initial block orders of every layer; the target by default.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub init: Option<Vec<f64>>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub log_every: Option<usize>,
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Learned orders as JSON.
    #[arg(long)]
    pub orders_out: Option<PathBuf>,
    /// Loss curve as CSV.
    #[arg(long)]
    pub progress: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct LearnOrdersArgs {
    #[arg(long, value_enum)]
    pub objective: Option<Objective>,
    #[arg(long)]
    pub graph: Option<PathBuf>,
    #[arg(long)]
    pub nodes: Option<usize>,
    #[arg(long)]
    pub graph_kind: Option<String>,
    #[arg(long, value_parser = parse_shift)]
    pub shift: Option<ShiftKind>,
    #[arg(long, value_parser = parse_kind)]
    pub kind: Option<TransformKind>,
    /// Block orders of the synthetic signal's transform (denoise objective).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub target: Option<Vec<f64>>,
    /// Signal band width K.
    #[arg(long)]
    pub k: Option<usize>,
    /// Noise coefficients inside the band.
    #[arg(long)]
    pub overlap: Option<usize>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long, value_enum)]
    pub filter: Option<FilterChoice>,
    #[arg(long, value_enum)]
    pub tying: Option<Tying>,
    /// Parameter count when --tying blocks.
    #[arg(long)]
    pub tying_blocks: Option<usize>,
    #[arg(long)]
    pub init_order: Option<f64>,
    /// Compression ratio (compress objective).
    #[arg(long)]
    pub ratio: Option<f64>,
    /// Signal CSV for the compress objective.
    #[arg(long)]
    pub signal: Option<PathBuf>,
    #[arg(long)]
    pub column: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub log_every: Option<usize>,
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long)]
    pub orders_out: Option<PathBuf>,
    #[arg(long)]
    pub progress: Option<PathBuf>,
}
