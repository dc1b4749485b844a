use std::ops::RangeInclusive;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(
    name = "tipcast",
    version,
    about = "Tipping forecasts and regime diagnostics over hidden-state fixtures"
)]
pub struct Cli {
    /// TOML file with defaults for any flag.
    #[arg(long, global = true, env = "TIPCAST_CONFIG")]
    pub config: Option<PathBuf>,
    /// Output format.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Basin centroids.
    #[command(subcommand)]
    Basin(BasinCmd),
    /// Tipping forecasts.
    #[command(subcommand)]
    Forecast(ForecastCmd),
    /// Per-layer scans.
    #[command(subcommand)]
    Layers(LayersCmd),
    /// Largest-component cohesion per layer.
    Cohesion(CohesionArgs),
    /// Seed sweep of the toy transformer block.
    ToySim(ToySimArgs),
    /// Noisy map simulation.
    #[command(subcommand)]
    Map(MapCmd),
    /// Regime classification of symbol trajectories.
    #[command(subcommand)]
    Regimes(RegimesCmd),
    /// Turn-level corpus statistics.
    #[command(subcommand)]
    Corpus(CorpusCmd),
    /// HTTP forecast service.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct LayerArgs {
    /// State file.
    #[arg(long)]
    pub hsf: PathBuf,
    /// Layer index; defaults to the penultimate layer.
    #[arg(long)]
    pub layer: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum BasinCmd {
    /// Phrase-isolated centroids of B and D (or of one label).
    Centroid {
        #[command(flatten)]
        input: LayerArgs,
        /// Only this label (A, B, C or D).
        #[arg(long)]
        label: Option<String>,
    },
}

#[derive(Debug, Subcommand)]
pub enum ForecastCmd {
    /// Closed-form forecast from the conversation groups against the basins.
    Tip {
        #[command(flatten)]
        input: LayerArgs,
        /// Take B and D from this file instead.
        #[arg(long)]
        basins: Option<PathBuf>,
    },
    /// One-step timing class; the last A group is the prompt extended by
    /// one greedy token.
    Timing {
        #[command(flatten)]
        input: LayerArgs,
        #[arg(long)]
        basins: Option<PathBuf>,
    },
    /// Turn-by-turn replay of a conversation file.
    Replay {
        /// File with B and D groups; its penultimate layer is used.
        #[arg(long)]
        basins: PathBuf,
        /// File with one C group per turn.
        #[arg(long)]
        conversation: PathBuf,
        #[arg(long)]
        warn_threshold_n: Option<u64>,
    },
}

#[derive(Debug, Subcommand)]
pub enum LayersCmd {
    /// Order parameter, drive and axis norm at every layer.
    Scan {
        #[arg(long)]
        hsf: PathBuf,
        /// Early-layer window for amplification, inclusive, e.g. 1..3.
        #[arg(long, value_parser = parse_inclusive, default_value = "1..3")]
        early: RangeInclusive<u64>,
    },
}

#[derive(Debug, Args)]
pub struct CohesionArgs {
    #[arg(long)]
    pub hsf: PathBuf,
    /// Cosine cut-off for an edge.
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Sweep these thresholds instead; with no values, the default grid.
    #[arg(long, num_args = 0.., value_delimiter = ',')]
    pub sweep: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct ToySimArgs {
    /// bare, skip or full.
    #[arg(long)]
    pub preset: Option<String>,
    /// Inclusive seed range, e.g. 0..49 for fifty seeds.
    #[arg(long)]
    pub seeds: Option<String>,
    /// JSON fixture with base vectors a, b, d; defaults to the shipped one.
    #[arg(long)]
    pub fixture: Option<PathBuf>,
    /// Zero all weight noise.
    #[arg(long)]
    pub zero_noise: bool,
}

#[derive(Debug, Subcommand)]
pub enum MapCmd {
    /// Iterate the map and optionally classify the binned trajectory.
    Sim {
        #[arg(long, allow_hyphen_values = true)]
        lambda: f64,
        #[arg(long)]
        rho: f64,
        #[arg(long, default_value_t = 0.0)]
        sigma: f64,
        #[arg(long)]
        steps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 0.2)]
        x0: f64,
        /// Bin the series into this many symbols and classify it.
        #[arg(long)]
        bins: Option<usize>,
    },
}

#[derive(Debug, Subcommand)]
pub enum RegimesCmd {
    /// Classify one trajectory.
    Classify(ClassifyArgs),
    /// Classify per-temperature transcripts, ordered by temperature.
    Cascade {
        /// Directory of `.txt` files, one sentence per line; the number in
        /// each file name is its temperature.
        #[arg(long)]
        dir: PathBuf,
        /// Cosine similarity at which two sentences share a symbol.
        #[arg(long)]
        similarity_threshold: Option<f64>,
    },
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    /// Text file, one sentence per line.
    #[arg(long, required_unless_present = "series", conflicts_with = "series")]
    pub sentences: Option<PathBuf>,
    /// Numbers separated by whitespace or commas.
    #[arg(long)]
    pub series: Option<PathBuf>,
    /// Split the text file with the Unicode (UAX #29) sentence-boundary
    /// rules instead of taking one sentence per line.
    #[arg(long, requires = "sentences")]
    pub split: bool,
    /// Cosine similarity at which two sentences share a symbol.
    #[arg(long)]
    pub similarity_threshold: Option<f64>,
    /// Bins for numeric series.
    #[arg(long)]
    pub bins: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum CorpusCmd {
    /// Clustered logistic regression on assistant turns.
    Regress {
        #[arg(long = "in")]
        input: PathBuf,
        /// exchangeable or independence.
        #[arg(long)]
        correlation: Option<String>,
    },
    /// Lag-1 autocorrelation against the role-preserving shuffled null.
    Null {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        shuffles: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// user or assistant.
        #[arg(long, default_value = "assistant")]
        role: String,
    },
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    /// Directory for persisted sessions; in memory when absent.
    #[arg(long)]
    pub state_dir: Option<PathBuf>,
    #[arg(long)]
    pub host: Option<String>,
    #[arg(long, env = "TIPCAST_PORT")]
    pub port: Option<u16>,
}

/// `A..B` with both ends included.
pub fn parse_inclusive(s: &str) -> Result<RangeInclusive<u64>, String> {
    let (a, b) = s
        .split_once("..")
        .ok_or_else(|| format!("expected START..END, got {s:?}"))?;
    let a: u64 = a.trim().parse().map_err(|e| format!("bad range start {a:?}: {e}"))?;
    let b: u64 = b
        .trim()
        .trim_start_matches('=')
        .parse()
        .map_err(|e| format!("bad range end {b:?}: {e}"))?;
    if b < a {
        return Err(format!("empty range {s:?}"));
    }
    Ok(a..=b)
}
