use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use mapperscope_core::analysis::{DEFAULT_MIN_NODES, DEFAULT_THRESHOLD};
use mapperscope_core::mapper::{DEFAULT_BINS, DEFAULT_GAIN, DEFAULT_RESOLUTION};

#[derive(Debug, Parser)]
#[command(name = "mapperscope", version, about = "Mapper models of classifier activations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic dataset (P.amf + P.jsonl) with planted error clusters.
    Synth(SynthArgs),
    /// Build the Mapper graph and colorings and write model.json.
    Build(BuildArgs),
    /// Extract problem clusters from a built model and write clusters.json.
    Analyze(AnalyzeArgs),
    /// Render an activation heat map over an image.
    Heatmap(HeatmapArgs),
    /// Serve a built model over HTTP.
    Serve(ServeArgs),
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub per_cluster: usize,
    /// Defaults to the number of error rates.
    #[arg(long)]
    pub clusters: Option<usize>,
    #[arg(long)]
    pub dims: usize,
    #[arg(long)]
    pub separation: f64,
    /// Comma-separated per-cluster error rates.
    #[arg(long, value_delimiter = ',', required = true)]
    pub error_rates: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out_prefix: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct RuleArgs {
    #[arg(long, env = "MAPPERSCOPE_MIN_COUNT", default_value_t = 3)]
    pub min_count: usize,
    #[arg(long, env = "MAPPERSCOPE_MAX_ACCURACY", default_value_t = 0.40)]
    pub max_accuracy: f64,
}

#[derive(Debug, Clone, Args)]
pub struct BuildArgs {
    /// Dataset prefix P (reads P.amf and P.jsonl).
    #[arg(long, env = "MAPPERSCOPE_DATASET")]
    pub dataset: PathBuf,
    #[arg(long, default_value_t = DEFAULT_RESOLUTION)]
    pub resolution: usize,
    #[arg(long, default_value_t = DEFAULT_GAIN)]
    pub gain: f64,
    #[arg(long, default_value_t = DEFAULT_BINS)]
    pub bins: usize,
    /// PCA components used as the lens.
    #[arg(long, default_value_t = 2)]
    pub lens_dims: usize,
    #[arg(long, default_value_t = 1)]
    pub top_k: usize,
    #[command(flatten)]
    pub rule: RuleArgs,
    #[arg(long, env = "MAPPERSCOPE_MODEL", default_value = "model.json")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct AnalyzeArgs {
    #[arg(long, env = "MAPPERSCOPE_MODEL")]
    pub model: PathBuf,
    #[arg(long, env = "MAPPERSCOPE_DATASET")]
    pub dataset: PathBuf,
    #[command(flatten)]
    pub rule: RuleArgs,
    /// Defaults to the top-k the model was built with.
    #[arg(long)]
    pub top_k: Option<usize>,
    #[arg(long, env = "MAPPERSCOPE_THRESHOLD", default_value_t = DEFAULT_THRESHOLD)]
    pub threshold: f64,
    #[arg(long, env = "MAPPERSCOPE_MIN_NODES", default_value_t = DEFAULT_MIN_NODES)]
    pub min_nodes: usize,
    #[arg(long, env = "MAPPERSCOPE_CLUSTERS", default_value = "clusters.json")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct HeatmapArgs {
    #[arg(long)]
    pub tensor: PathBuf,
    #[arg(long)]
    pub image: PathBuf,
    #[arg(long, default_value = "l2")]
    pub mode: String,
    #[arg(long, default_value_t = 0.6)]
    pub alpha: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct ServeArgs {
    #[arg(long, env = "MAPPERSCOPE_MODEL")]
    pub model: PathBuf,
    /// Dataset prefix; P.jsonl is always read, P.amf only with --routing.
    #[arg(long, env = "MAPPERSCOPE_DATASET")]
    pub dataset: PathBuf,
    #[arg(long, env = "MAPPERSCOPE_CLUSTERS")]
    pub clusters: Option<PathBuf>,
    #[arg(long, env = "MAPPERSCOPE_IMAGES_ROOT", default_value = ".")]
    pub images_root: PathBuf,
    /// Directory of `<image_id>.amf3` activation tensors.
    #[arg(long, env = "MAPPERSCOPE_TENSORS_ROOT")]
    pub tensors_root: Option<PathBuf>,
    #[arg(long, env = "MAPPERSCOPE_HOST", default_value = "127.0.0.1")]
    pub host: String,
    #[arg(long, env = "MAPPERSCOPE_PORT", default_value_t = 8080)]
    pub port: u16,
    /// Load cluster centroids for POST /api/route (needs --clusters).
    #[arg(long, env = "MAPPERSCOPE_ROUTING")]
    pub routing: bool,
    #[arg(long, env = "MAPPERSCOPE_SLACK", default_value_t = 1.0)]
    pub slack: f64,
    /// Dashboard assets served at /.
    #[arg(long, env = "MAPPERSCOPE_STATIC_DIR")]
    pub static_dir: Option<PathBuf>,
}
