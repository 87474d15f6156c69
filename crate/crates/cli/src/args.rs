use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "hon", version, about = "Higher-order network models of trajectory data")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a fixed-order model and write it as JSON plus an edge CSV.
    Build(BuildArgs),
    /// Select the optimal order by nested likelihood-ratio tests.
    DetectOrder(DetectArgs),
    /// Higher-order betweenness projected onto first-order nodes.
    Betweenness(BetweennessArgs),
    /// Higher-order PageRank and its first-order projection.
    Pagerank(PagerankArgs),
    /// Next-step prediction with a multi-order model.
    Predict(PredictArgs),
    /// Centrality and prediction metrics for every order up to K.
    Evaluate(EvaluateArgs),
    /// Generate trajectories from a planted higher-order chain.
    Synth(SynthArgs),
    /// Path-length summary of a corpus.
    Stats(StatsArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Worker threads (default: available parallelism).
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Args)]
pub struct Inputs {
    /// Trajectory corpus in ngram format.
    #[arg(long)]
    pub ngram: Option<PathBuf>,
    /// Tab-separated first-order edge list.
    #[arg(long)]
    pub graph: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Attributed,
    NonAttributed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WeightModeArg {
    NegLogProb,
    Unit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PairsArg {
    /// Pairs of distinct higher-order nodes.
    Ho,
    /// Pairs of distinct first-order nodes.
    FirstOrder,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EndpointsArg {
    Exclude,
    Include,
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    #[command(flatten)]
    pub inputs: Inputs,
    #[arg(short = 'k', long = "order")]
    pub order: usize,
    #[arg(long, value_enum, default_value = "attributed")]
    pub variant: VariantArg,
    /// Upper bound on higher-order nodes when building from topology alone.
    #[arg(long, default_value_t = hon_core::hon::DEFAULT_NODE_CAP)]
    pub node_cap: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct DetectArgs {
    #[command(flatten)]
    pub inputs: Inputs,
    #[arg(short = 'K', long = "max-order", default_value_t = 5)]
    pub max_order: usize,
    /// Significance level of each test.
    #[arg(long, default_value_t = hon_core::multi_order::DEFAULT_EPSILON)]
    pub epsilon: f64,
    /// Also score each path's first node with the empirical start distribution.
    #[arg(long)]
    pub with_start: bool,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct ModelSource {
    #[command(flatten)]
    pub inputs: Inputs,
    /// Model JSON written by `build` (instead of --ngram).
    #[arg(long, conflicts_with = "ngram")]
    pub model: Option<PathBuf>,
    #[arg(short = 'k', long = "order")]
    pub order: Option<usize>,
    #[arg(long, value_enum, default_value = "attributed")]
    pub variant: VariantArg,
}

#[derive(Debug, Args)]
pub struct BetweennessArgs {
    #[command(flatten)]
    pub source: ModelSource,
    #[arg(long, value_enum, default_value = "neg-log-prob")]
    pub weight_mode: WeightModeArg,
    #[arg(long, value_enum, default_value = "ho")]
    pub pairs: PairsArg,
    #[arg(long, value_enum, default_value = "exclude")]
    pub endpoints: EndpointsArg,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct PageRankParams {
    #[arg(long, default_value_t = 0.85)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, default_value_t = 100_000)]
    pub max_iter: usize,
}

#[derive(Debug, Args)]
pub struct PagerankArgs {
    #[command(flatten)]
    pub source: ModelSource,
    #[command(flatten)]
    pub params: PageRankParams,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[command(flatten)]
    pub inputs: Inputs,
    #[arg(short = 'K', long = "max-order", default_value_t = 3)]
    pub max_order: usize,
    /// Comma-separated context, oldest node first. Repeatable.
    #[arg(long)]
    pub context: Vec<String>,
    /// Held-out corpus to score (every transition becomes a sample).
    #[arg(long)]
    pub test: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub inputs: Inputs,
    #[arg(short = 'K', long = "max-order", default_value_t = 5)]
    pub max_order: usize,
    /// Fraction of trajectories used for training.
    #[arg(long, default_value_t = 0.5)]
    pub split: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "neg-log-prob")]
    pub weight_mode: WeightModeArg,
    #[arg(long, value_enum, default_value = "ho")]
    pub pairs: PairsArg,
    #[arg(long, value_enum, default_value = "exclude")]
    pub endpoints: EndpointsArg,
    #[command(flatten)]
    pub pagerank: PageRankParams,
    /// Additive smoothing of model scores in the KL comparison.
    #[arg(long, default_value_t = hon_core::metrics::DEFAULT_SMOOTHING)]
    pub smoothing: f64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Base graph; without it a ring-with-chords graph is generated.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    #[arg(long, default_value_t = 20)]
    pub nodes: usize,
    #[arg(long, default_value_t = 3)]
    pub out_degree: usize,
    #[arg(short = 'k', long = "order", default_value_t = 3)]
    pub order: usize,
    /// Dirichlet concentration of each planted row ("inf" for uniform).
    #[arg(long, default_value_t = 0.3)]
    pub skew: f64,
    #[arg(long, default_value_t = 20_000)]
    pub paths: usize,
    #[arg(long, default_value_t = 10)]
    pub min_len: usize,
    #[arg(long, default_value_t = 20)]
    pub max_len: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[arg(long)]
    pub ngram: PathBuf,
    #[command(flatten)]
    pub common: Common,
}
