use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "causeway", version, about = "Causal discovery for sequential tabular data")]
pub struct Cli {
    /// TOML file with default settings; flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Worker threads for parallel stages (0 = one per core).
    #[arg(long, global = true, env = "CAUSEWAY_THREADS")]
    pub threads: Option<usize>,

    /// Where to write the run manifest (default: next to the main output).
    #[arg(long, global = true, value_name = "FILE")]
    pub manifest: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Clean a delimited table: drop keys and constant columns, standardize.
    Ingest(IngestCmd),
    /// Cluster features by correlation and keep one medoid per cluster.
    Cluster(ClusterCmd),
    /// Learn a graph with the PC algorithm.
    Discover(DiscoverCmd),
    /// Fit a linear-Gaussian network to data on a given DAG.
    Fit(FitCmd),
    /// Draw rows from a fitted network.
    Sample(SampleCmd),
    /// Compare a learned graph with a true one.
    Score(ScoreCmd),
    /// Recall and precision over an alpha/soe grid on sampled data.
    Sweep(SweepCmd),
    /// Ingest, cluster, reduce, discover and export in one go.
    Pipeline(PipelineCmd),
}

#[derive(Debug, Args, Clone, Default)]
pub struct IngestOpts {
    /// Field delimiter: `,` or `tab` (default: detected from the header).
    #[arg(long)]
    pub delimiter: Option<String>,
    /// Column-name token marking an identifier; repeatable, replaces the defaults.
    #[arg(long = "key-pattern", value_name = "TOKEN")]
    pub key_patterns: Vec<String>,
    /// Keep the original scale.
    #[arg(long)]
    pub no_standardize: bool,
}

#[derive(Debug, Args, Clone, Default)]
pub struct PcOpts {
    /// Largest conditioning-set size.
    #[arg(long)]
    pub depth: Option<usize>,
    /// Conditioning-set candidates: two-sided or paper-strict.
    #[arg(long)]
    pub candidates: Option<String>,
    /// Skeleton search: sequential or level-parallel.
    #[arg(long)]
    pub mode: Option<String>,
    /// Two-column TSV of column name and tier rank.
    #[arg(long, value_name = "FILE")]
    pub tiers: Option<PathBuf>,
}

#[derive(Debug, Args, Clone, Default)]
pub struct Significance {
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Squared partial correlations below this count as independence.
    #[arg(long)]
    pub soe: Option<f64>,
}

#[derive(Debug, Args, Clone, Default)]
pub struct Grid {
    /// Comma-separated significance levels.
    #[arg(long, value_delimiter = ',')]
    pub alphas: Vec<f64>,
    /// Comma-separated strength-of-effect thresholds.
    #[arg(long, value_delimiter = ',')]
    pub soes: Vec<f64>,
    #[arg(long)]
    pub replicates: Option<usize>,
    /// Rows per replicate.
    #[arg(long)]
    pub n: Option<usize>,
    /// Score against the generating DAG instead of its pattern.
    #[arg(long)]
    pub raw_truth: bool,
}

#[derive(Debug, Args)]
pub struct IngestCmd {
    pub input: PathBuf,
    /// Cleaned table (CSV).
    #[arg(long, short)]
    pub out: PathBuf,
    /// Column report (default: <out>.provenance.tsv).
    #[arg(long, value_name = "FILE")]
    pub provenance: Option<PathBuf>,
    #[command(flatten)]
    pub ingest: IngestOpts,
}

#[derive(Debug, Args)]
pub struct ClusterCmd {
    pub input: PathBuf,
    /// Number of clusters.
    #[arg(long)]
    pub k: Option<usize>,
    /// complete, average, median, centroid or ward.
    #[arg(long)]
    pub linkage: Option<String>,
    #[arg(long, value_name = "DIR")]
    pub out_dir: PathBuf,
    #[command(flatten)]
    pub ingest: IngestOpts,
}

#[derive(Debug, Args)]
pub struct DiscoverCmd {
    pub input: PathBuf,
    #[command(flatten)]
    pub sig: Significance,
    #[command(flatten)]
    pub pc: PcOpts,
    /// Output path without extension; one file per format.
    #[arg(long, short)]
    pub out: PathBuf,
    /// Comma-separated list of dot, graphml, json.
    #[arg(long, value_delimiter = ',')]
    pub formats: Vec<String>,
    #[command(flatten)]
    pub ingest: IngestOpts,
}

#[derive(Debug, Args)]
pub struct FitCmd {
    pub input: PathBuf,
    /// Graph in the JSON edge-list format.
    #[arg(long)]
    pub graph: PathBuf,
    /// Orient remaining undirected edges by a random consistent extension.
    #[arg(long)]
    pub extend: bool,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, short)]
    pub out: PathBuf,
    #[command(flatten)]
    pub ingest: IngestOpts,
}

#[derive(Debug, Args)]
pub struct SampleCmd {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ScoreCmd {
    /// Learned graph (JSON).
    #[arg(long)]
    pub learned: PathBuf,
    /// True graph (JSON). A DAG is turned into its pattern unless --raw-truth.
    #[arg(long)]
    pub truth: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub tiers: Option<PathBuf>,
    #[arg(long)]
    pub raw_truth: bool,
    /// Report (JSON).
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SweepCmd {
    /// Generating network (text format).
    #[arg(long, conflicts_with = "random")]
    pub model: Option<PathBuf>,
    /// Generate a random network with this many nodes instead.
    #[arg(long, value_name = "NODES", required_unless_present = "model")]
    pub random: Option<usize>,
    #[arg(long)]
    pub mean_degree: Option<f64>,
    /// Tier blocks of the random network (0 = none).
    #[arg(long)]
    pub tier_blocks: Option<usize>,
    #[arg(long)]
    pub network_seed: Option<u64>,
    /// First replicate seed; replicate r uses seed + r.
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub grid: Grid,
    #[command(flatten)]
    pub pc: PcOpts,
    /// Summary table (TSV).
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PipelineCmd {
    /// Input table; omit with --demo.
    #[arg(required_unless_present = "demo")]
    pub input: Option<PathBuf>,
    /// Run on generated assembly-line data.
    #[arg(long, conflicts_with = "input")]
    pub demo: bool,
    /// Also fit the learned graph and sweep alpha and soe on data sampled from it.
    #[arg(long)]
    pub synthetic: bool,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub linkage: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub sig: Significance,
    #[command(flatten)]
    pub pc: PcOpts,
    #[command(flatten)]
    pub grid: Grid,
    #[arg(long, value_delimiter = ',')]
    pub formats: Vec<String>,
    #[arg(long, value_name = "DIR")]
    pub out_dir: PathBuf,
    #[command(flatten)]
    pub ingest: IngestOpts,
}
