use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use trendcast::evaluation::{ImportanceMetric, Indicator, SplitKind};
use trendcast::{ModelKind, TargetKind};

#[derive(Debug, Parser)]
#[command(name = "trendcast", version, about = "Forecast the popularity of scientific topics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a seeded synthetic corpus with known leading indicators
    Synth(SynthArgs),
    /// Validate corpus files and write them back in canonical form
    Ingest(IngestArgs),
    /// Write the feature table for one horizon as CSV
    Featurize(FeaturizeArgs),
    /// Train one model and save it as JSON
    Train(TrainArgs),
    /// Train pop and pct models for horizons 1..=H into a registry directory
    BuildRegistry(BuildRegistryArgs),
    /// Cross-validate a model and report pooled and per-fold metrics
    Evaluate(EvaluateArgs),
    /// Forecast topics from a registry directory, as the service does
    Predict(PredictArgs),
    /// Lagged correlation profiles between a topic's popularity and its indicators
    Correlate(CorrelateArgs),
    /// Permutation feature importance of a freshly trained model
    Importance(ImportanceArgs),
    /// Rank topics by predicted change and flag trend reversals
    RankMovers(RankMoversArgs),
    /// Serve the HTTP API
    Serve(ServeArgs),
    /// Download yearly patent counts for a query into patents.csv format
    FetchPatents(FetchPatentsArgs),
}

/// Corpus input files. `--corpus` names a directory holding the standard
/// file names; individual flags override it.
#[derive(Debug, Clone, Args)]
pub struct CorpusArgs {
    /// Directory with topic_counts.csv, global_stats.csv, patents.csv and optionally embeddings.csv
    #[arg(long, env = "TRENDCAST_CORPUS")]
    pub corpus: Option<PathBuf>,
    /// Per-topic yearly publication counts (topic,year,publications,review_publications)
    #[arg(long, env = "TRENDCAST_COUNTS")]
    pub counts: Option<PathBuf>,
    /// Global yearly statistics (year,medline_total,us_publication_fraction,patents_total)
    #[arg(long, env = "TRENDCAST_GLOBAL")]
    pub global: Option<PathBuf>,
    /// Per-topic yearly patent counts (topic,year,patent_count)
    #[arg(long, env = "TRENDCAST_PATENTS")]
    pub patents: Option<PathBuf>,
    /// Topic embeddings (topic,e0,e1,...)
    #[arg(long, env = "TRENDCAST_EMBEDDINGS")]
    pub embeddings: Option<PathBuf>,
}

/// Which rows to build and how.
#[derive(Debug, Clone, Args)]
pub struct WindowArgs {
    /// Earliest base year
    #[arg(long = "from", env = "TRENDCAST_FROM", default_value_t = 1979)]
    pub from: i32,
    /// Latest base year (also capped by the last corpus year minus the horizon)
    #[arg(long = "to", env = "TRENDCAST_TO", default_value_t = 2019)]
    pub to: i32,
    /// Leave embedding features out even when the corpus has them
    #[arg(long, env = "TRENDCAST_NO_EMBEDDINGS")]
    pub no_embeddings: bool,
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// Model family
    #[arg(long, env = "TRENDCAST_MODEL", default_value = "gbdt", value_parser = parse_from_str::<ModelKind>)]
    pub model: ModelKind,
    /// Seed for splits, permutations and model parameters
    #[arg(long, env = "TRENDCAST_SEED", default_value_t = 42)]
    pub seed: u64,
    /// Boosting rounds
    #[arg(long, env = "TRENDCAST_ROUNDS", default_value_t = 500)]
    pub rounds: usize,
    /// Maximum tree depth
    #[arg(long, env = "TRENDCAST_MAX_DEPTH", default_value_t = 6)]
    pub max_depth: usize,
    /// Shrinkage applied to each tree
    #[arg(long, env = "TRENDCAST_LEARNING_RATE", default_value_t = 0.05)]
    pub learning_rate: f64,
    /// Minimum rows per leaf
    #[arg(long, env = "TRENDCAST_MIN_SAMPLES_LEAF", default_value_t = 20)]
    pub min_samples_leaf: usize,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Output directory
    #[arg(long, env = "TRENDCAST_OUT")]
    pub out: PathBuf,
    /// Generator seed
    #[arg(long, env = "TRENDCAST_SEED", default_value_t = 42)]
    pub seed: u64,
    /// Number of topics
    #[arg(long, env = "TRENDCAST_TOPICS", default_value_t = 50)]
    pub topics: usize,
    /// Width of random topic embeddings; 0 writes no embeddings file
    #[arg(long, env = "TRENDCAST_EMBEDDING_DIM", default_value_t = 0)]
    pub embedding_dim: usize,
    /// First year
    #[arg(long = "from", env = "TRENDCAST_FROM", default_value_t = 1975)]
    pub from: i32,
    /// Last year
    #[arg(long = "to", env = "TRENDCAST_TO", default_value_t = 2019)]
    pub to: i32,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    /// Output directory for the canonical files and popularity.csv
    #[arg(long, env = "TRENDCAST_OUT")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct FeaturizeArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    #[command(flatten)]
    pub window: WindowArgs,
    /// Forecast horizon in years, 1 to 6
    #[arg(long, env = "TRENDCAST_HORIZON", default_value_t = 5)]
    pub horizon: u32,
    /// Output CSV (standard output if absent)
    #[arg(long, env = "TRENDCAST_OUT")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    #[command(flatten)]
    pub window: WindowArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Target variable
    #[arg(long, env = "TRENDCAST_TARGET", default_value = "pop", value_parser = parse_from_str::<TargetKind>)]
    pub target: TargetKind,
    /// Forecast horizon in years, 1 to 6
    #[arg(long, env = "TRENDCAST_HORIZON", default_value_t = 5)]
    pub horizon: u32,
    /// Output model file
    #[arg(long, env = "TRENDCAST_OUT")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BuildRegistryArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    #[command(flatten)]
    pub window: WindowArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Largest horizon; models are trained for every horizon from 1 up to it
    #[arg(long, env = "TRENDCAST_HORIZON", default_value_t = 6)]
    pub horizon: u32,
    /// Output directory
    #[arg(long, env = "TRENDCAST_OUT")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    #[command(flatten)]
    pub window: WindowArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Target variable
    #[arg(long, env = "TRENDCAST_TARGET", default_value = "pop", value_parser = parse_from_str::<TargetKind>)]
    pub target: TargetKind,
    /// Forecast horizon in years, 1 to 6
    #[arg(long, env = "TRENDCAST_HORIZON", default_value_t = 5)]
    pub horizon: u32,
    /// Cross-validation scheme
    #[arg(long, env = "TRENDCAST_SPLIT", default_value = "temporal", value_parser = parse_from_str::<SplitKind>)]
    pub split: SplitKind,
    /// Number of folds
    #[arg(long, env = "TRENDCAST_N_SPLITS", default_value_t = 30)]
    pub n_splits: usize,
    /// Metrics CSV; when given, the pooled table is printed to standard output
    #[arg(long, env = "TRENDCAST_OUT")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    /// Registry directory written by build-registry
    #[arg(long, env = "TRENDCAST_MODELS")]
    pub models: PathBuf,
    /// Topic to forecast (repeatable); all topics if absent
    #[arg(long = "topic", env = "TRENDCAST_TOPIC", value_delimiter = ',')]
    pub topics: Vec<String>,
    /// Largest horizon to forecast (defaults to the registry's largest)
    #[arg(long, env = "TRENDCAST_HORIZON")]
    pub horizon: Option<u32>,
    /// Output JSON (standard output if absent)
    #[arg(long, env = "TRENDCAST_OUT")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CorrelateArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    /// Topic to profile (repeatable); all topics if absent
    #[arg(long = "topic", env = "TRENDCAST_TOPIC", value_delimiter = ',')]
    pub topics: Vec<String>,
    /// Series correlated against the indicators
    #[arg(long = "series", env = "TRENDCAST_SERIES", default_value = "popularity", value_parser = parse_from_str::<Indicator>)]
    pub series: Indicator,
    /// Indicator to profile (repeatable): popularity, publications, review_popularity, research_popularity, patents
    #[arg(
        long = "indicator",
        env = "TRENDCAST_INDICATOR",
        value_delimiter = ',',
        default_value = "review_popularity,research_popularity,patents",
        value_parser = parse_from_str::<Indicator>
    )]
    pub indicators: Vec<Indicator>,
    /// Profile lags run from -max-lag to +max-lag; negative means the indicator leads
    #[arg(long, env = "TRENDCAST_MAX_LAG", default_value_t = 5)]
    pub max_lag: u32,
    /// First year of the series
    #[arg(long = "from", env = "TRENDCAST_FROM", default_value_t = 1979)]
    pub from: i32,
    /// Last year of the series
    #[arg(long = "to", env = "TRENDCAST_TO", default_value_t = 2019)]
    pub to: i32,
    /// Output CSV (standard output if absent)
    #[arg(long, env = "TRENDCAST_OUT")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ImportanceArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    #[command(flatten)]
    pub window: WindowArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Target variable
    #[arg(long, env = "TRENDCAST_TARGET", default_value = "pct", value_parser = parse_from_str::<TargetKind>)]
    pub target: TargetKind,
    /// Forecast horizon in years, 1 to 6
    #[arg(long, env = "TRENDCAST_HORIZON", default_value_t = 5)]
    pub horizon: u32,
    /// Loss whose rise is measured: r2, mse or mae
    #[arg(long, env = "TRENDCAST_METRIC", default_value = "r2", value_parser = parse_from_str::<ImportanceMetric>)]
    pub metric: ImportanceMetric,
    /// Shuffles per feature
    #[arg(long, env = "TRENDCAST_REPEATS", default_value_t = 5)]
    pub repeats: usize,
    /// Output CSV (standard output if absent)
    #[arg(long, env = "TRENDCAST_OUT")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RankMoversArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    /// Saved model (pop or pct target)
    #[arg(long, env = "TRENDCAST_MODEL_FILE")]
    pub model_file: PathBuf,
    /// Base year (defaults to the last corpus year)
    #[arg(long, env = "TRENDCAST_YEAR")]
    pub year: Option<i32>,
    /// Output CSV (standard output if absent)
    #[arg(long, env = "TRENDCAST_OUT")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    /// Port to listen on
    #[arg(long, env = "TRENDCAST_PORT", default_value_t = 8080)]
    pub port: u16,
    /// Address to bind
    #[arg(long, env = "TRENDCAST_HOST", default_value = "127.0.0.1")]
    pub host: std::net::IpAddr,
    /// Registry directory written by build-registry
    #[arg(long, env = "TRENDCAST_MODELS")]
    pub models: PathBuf,
    /// Corpus directory with the standard file names
    #[arg(long, env = "TRENDCAST_CORPUS")]
    pub corpus: PathBuf,
    /// Directory of web client assets served under /app
    #[arg(long = "static", env = "TRENDCAST_STATIC")]
    pub static_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FetchPatentsArgs {
    /// Search text
    #[arg(long, env = "TRENDCAST_QUERY")]
    pub query: String,
    /// Topic name written to the rows (defaults to the query)
    #[arg(long, env = "TRENDCAST_TOPIC")]
    pub topic: Option<String>,
    /// First year
    #[arg(long = "from", env = "TRENDCAST_FROM", default_value_t = 1979)]
    pub from: i32,
    /// Last year
    #[arg(long = "to", env = "TRENDCAST_TO", default_value_t = 2019)]
    pub to: i32,
    /// patents.csv to write; rows already present for the topic are kept and their years skipped
    #[arg(long, env = "TRENDCAST_OUT")]
    pub out: PathBuf,
    /// Patent search endpoint
    #[arg(long, env = "TRENDCAST_ENDPOINT", default_value = crate::fetch::DEFAULT_ENDPOINT)]
    pub endpoint: String,
    /// API key sent as X-Api-Key
    #[arg(long, env = "TRENDCAST_API_KEY", hide_env_values = true)]
    pub api_key: Option<String>,
}

fn parse_from_str<T>(s: &str) -> Result<T, String>
where
    T: std::str::FromStr,
    T::Err: std::fmt::Display,
{
    s.parse::<T>().map_err(|e| e.to_string())
}
