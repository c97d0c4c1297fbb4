use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "eulerian",
    version,
    about = "Eulerian shape inference from paired landmark configurations"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Maximum-likelihood estimate of the population squared canonical correlations.
    Estimate(EstimateArgs),
    /// Probability that the sample roots exceed a threshold.
    Tailprob(TailArgs),
    /// Simulate squared canonical correlations (and optionally landmark files).
    Simulate(SimulateArgs),
    /// Density values on the ordered (r1², r2²) triangle for plotting.
    DensityGrid(GridArgs),
    /// Re-estimate on a schedule of landmark subsets.
    Discriminate(DiscriminateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CenterArg {
    /// Sample mean for multi-specimen files, none for a single figure.
    Auto,
    None,
    SampleMean,
}

/// Settings shared by every subcommand.
#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Dimension K; checked against the inputs when they also fix it.
    #[arg(long)]
    pub k: Option<usize>,
    /// Highest degree summed by the zonal series form.
    #[arg(long, default_value_t = 60)]
    pub max_degree: usize,
    /// Gauss-Legendre nodes over the O(2) rotation angle.
    #[arg(long, default_value_t = 64)]
    pub quad_nodes: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Output file (default: standard output).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    /// Require the exact polynomial form (fails unless (K - n)/2 is a negative integer).
    #[arg(long, conflicts_with = "series")]
    pub polynomial: bool,
    /// Force the zonal series form.
    #[arg(long)]
    pub series: bool,
}

/// Where the two sides of each pair come from.
#[derive(Debug, Clone, Args)]
pub struct PairInputs {
    /// Landmark file of a population; give it twice for population Y then population X.
    #[arg(long, num_args = 1)]
    pub population: Vec<PathBuf>,
    /// Landmark file with one template, paired with every specimen of Y.
    #[arg(long, conflicts_with = "figure")]
    pub template: Option<PathBuf>,
    /// Landmark file with one figure, paired with every specimen of Y.
    #[arg(long)]
    pub figure: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = CenterArg::Auto)]
    pub center: CenterArg,
}

#[derive(Debug, Clone, Args)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub pairs: PairInputs,
    /// Precomputed samples file (one line of K roots per sample) instead of landmark files.
    #[arg(long, conflicts_with_all = ["population", "template", "figure"], requires = "n")]
    pub samples: Option<PathBuf>,
    /// Degrees of freedom n = N - 1 for --samples.
    #[arg(long)]
    pub n: Option<usize>,
    /// Deterministic Nelder-Mead starts.
    #[arg(long, default_value_t = 5)]
    pub starts: usize,
    /// Nelder-Mead iterations per start.
    #[arg(long, default_value_t = 500)]
    pub max_iterations: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct TailArgs {
    /// Population squared canonical correlations, comma separated.
    #[arg(long, value_delimiter = ',', conflicts_with = "estimate")]
    pub rho2: Option<Vec<f64>>,
    /// JSON output of `estimate` supplying rho2, K and n.
    #[arg(long)]
    pub estimate: Option<PathBuf>,
    /// Degrees of freedom n = N - 1.
    #[arg(long)]
    pub n: Option<usize>,
    /// Threshold (t1, t2, ...), comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub t: Vec<f64>,
    /// Simulated samples when the quadrature path does not apply.
    #[arg(long, default_value_t = 100_000)]
    pub mc_samples: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    pub rho2: Vec<f64>,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub count: usize,
    /// Also write the X population as a landmark file (N = n + 1).
    #[arg(long, requires = "y_out")]
    pub x_out: Option<PathBuf>,
    /// Also write the Y population as a landmark file (N = n + 1).
    #[arg(long, requires = "x_out")]
    pub y_out: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    pub rho2: Vec<f64>,
    #[arg(long)]
    pub n: usize,
    /// Cells per axis; R(R + 1)/2 rows are written.
    #[arg(long, default_value_t = 100)]
    pub resolution: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct DiscriminateArgs {
    #[command(flatten)]
    pub pairs: PairInputs,
    /// Landmark subsets separated by ';', each a comma list of 1-based
    /// indices or ranges, e.g. "1-13;1-11;1-3,5-10".
    #[arg(long)]
    pub schedule: String,
    /// Relative change of the largest estimate flagged as drastic.
    #[arg(long, default_value_t = 0.1)]
    pub threshold: f64,
    #[arg(long, default_value_t = 5)]
    pub starts: usize,
    /// Nelder-Mead iterations per start.
    #[arg(long, default_value_t = 500)]
    pub max_iterations: usize,
    #[command(flatten)]
    pub common: Common,
}
