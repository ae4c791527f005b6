use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "instasel", version, about = "Pick a graph-learning model for a new graph without training any candidate")]
pub struct Cli {
    /// TOML config file; command-line flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Seed for every random choice. Required by commands that use randomness.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Extract meta-features for every graph of a catalog, one CSV per schema.
    Features(FeaturesArgs),
    /// Write node and edge train/val/test splits for every graph of a catalog.
    Splits(SplitsArgs),
    /// Generate the folds of an evaluation testbed.
    Testbed(TestbedArgs),
    /// Evaluate selection algorithms on a testbed and write reports.
    Run(RunArgs),
    /// Rank candidate models for a query graph.
    Select(SelectArgs),
    /// Render Markdown tables from report CSVs.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct FeaturesArgs {
    /// Graph catalog CSV.
    #[arg(long)]
    pub graphs: Option<PathBuf>,
    /// Comma-separated schemas: regular, graphlets, compact, reg_plus_graphlets.
    #[arg(long)]
    pub schema: Option<String>,
    /// Output directory; receives `<schema>.csv`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub force: bool,
    /// Estimate orbit counts from at most this many neighbors per edge (needs --seed).
    #[arg(long)]
    pub orbit_cap: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SplitKind {
    Node,
    Edge,
    Both,
}

#[derive(Debug, Args)]
pub struct SplitsArgs {
    #[arg(long)]
    pub graphs: Option<PathBuf>,
    /// Output directory; receives `<graph_id>.node_split.csv` and `<graph_id>.edge_split.csv`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "both")]
    pub kind: SplitKind,
    #[arg(long)]
    pub force: bool,
}

/// Inputs that define a testbed; shared by `testbed` and `run`.
#[derive(Debug, Args)]
pub struct TestbedInputs {
    /// fully_observed, sparse, out_of_domain, small_to_large or cross_task.
    #[arg(long)]
    pub testbed: Option<String>,
    #[arg(long)]
    pub graphs: Option<PathBuf>,
    /// Performance CSV (the source task for cross_task).
    #[arg(long)]
    pub perf: Option<PathBuf>,
    /// Fraction of observed cells per training row (sparse).
    #[arg(long)]
    pub sparsity: Option<f64>,
    /// Node-count threshold (small_to_large).
    #[arg(long)]
    pub epsilon: Option<usize>,
    /// Target-task performance CSV (cross_task).
    #[arg(long)]
    pub target_perf: Option<PathBuf>,
    /// Source model catalog (cross_task); models match by id when omitted.
    #[arg(long)]
    pub source_models: Option<PathBuf>,
    /// Target model catalog (cross_task).
    #[arg(long)]
    pub target_models: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TestbedArgs {
    #[command(flatten)]
    pub inputs: TestbedInputs,
    /// Output split CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub inputs: TestbedInputs,
    /// Saved split from `instasel testbed`; generated from the testbed flags when omitted.
    #[arg(long)]
    pub split: Option<PathBuf>,
    /// Meta-feature CSV; extracted from --graphs with --schema when omitted.
    #[arg(long)]
    pub features: Option<PathBuf>,
    #[arg(long)]
    pub schema: Option<String>,
    /// Comma-separated algorithms.
    #[arg(long)]
    pub algorithms: Option<String>,
    /// Output directory; receives report.csv and report.md.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Args)]
pub struct SelectArgs {
    /// Query graph edge list.
    #[arg(long)]
    pub query: PathBuf,
    /// Treat the query edge list as directed.
    #[arg(long)]
    pub directed: bool,
    /// Fitted selector bundle.
    #[arg(long, conflicts_with_all = ["features", "perf", "algorithm"])]
    pub model: Option<PathBuf>,
    /// Training meta-features (fit mode).
    #[arg(long)]
    pub features: Option<PathBuf>,
    /// Training performances (fit mode).
    #[arg(long)]
    pub perf: Option<PathBuf>,
    /// Algorithm to fit (fit mode).
    #[arg(long)]
    pub algorithm: Option<String>,
    /// Save the fitted selector bundle here.
    #[arg(long, requires = "perf")]
    pub save_model: Option<PathBuf>,
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Report CSVs written by `instasel run`.
    #[arg(required = true)]
    pub reports: Vec<PathBuf>,
    /// Markdown output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub force: bool,
}
