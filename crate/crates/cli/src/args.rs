use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "tvinesynth", version, about = "Truncated C-vine synthetic data with privacy and utility evaluation")]
pub struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true, env = "TVINESYNTH_JOBS")]
    pub jobs: Option<usize>,

    /// Name of the binary response column in every CSV.
    #[arg(long, global = true, default_value = "y")]
    pub response: String,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate the block-Gaussian benchmark as train/test CSVs.
    Simulate(SimulateArgs),
    /// Privacy-aware covariate order from sensitive columns.
    Order(OrderArgs),
    /// Fit a C-vine model.
    Fit(FitArgs),
    /// Draw synthetic rows from a fitted model.
    Sample(SampleArgs),
    /// Run an inference attack against the C-vine synthesizer.
    #[command(subcommand)]
    Attack(AttackCommand),
    /// Train-on-synthetic / train-on-real AUCs.
    Utility(UtilityArgs),
    /// Precision, recall and authenticity of synthetic rows.
    Fidelity(FidelityArgs),
    /// Utility and privacy across truncation levels, with a plot.
    Sweep(SweepArgs),
    /// Re-run the command recorded in a manifest.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Directory for all outputs (created if missing).
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Families {
    /// Independence, Gaussian, Clayton, Gumbel, Frank and Joe with rotations.
    All,
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AssociationArg {
    Kendall,
    Pearson,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PrivacyArg {
    Mab,
    Pg,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Training rows.
    #[arg(long, default_value_t = 1000)]
    pub n: usize,

    /// Share of all simulated rows held out as test data.
    #[arg(long, default_value_t = 0.2)]
    pub test_fraction: f64,

    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct OrderArgs {
    #[arg(long)]
    pub data: PathBuf,

    /// Sensitive covariate names, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub sensitive: Vec<String>,

    /// Association cutoff for covariates placed right after the sensitive ones.
    #[arg(long, default_value_t = 0.1)]
    pub threshold: f64,

    #[arg(long, value_enum, default_value_t = AssociationArg::Kendall)]
    pub association: AssociationArg,

    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// Order file written by `order`.
    #[arg(long)]
    pub order: PathBuf,

    #[arg(long, value_enum, default_value_t = Families::All)]
    pub families: Families,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long)]
    pub data: PathBuf,

    #[command(flatten)]
    pub model: ModelArgs,

    /// Highest fitted tree (defaults to the number of covariates).
    #[arg(long)]
    pub t_max: Option<usize>,

    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long)]
    pub model: PathBuf,

    /// Truncation level (defaults to the model's own).
    #[arg(long)]
    pub truncate: Option<usize>,

    /// Rows to draw (defaults to the training size).
    #[arg(short = 'n', long)]
    pub n: Option<usize>,

    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct TargetArgs {
    /// Outlying targets in the sensitive column.
    #[arg(long, default_value_t = 3)]
    pub outliers: usize,

    /// Uniformly drawn targets.
    #[arg(long, default_value_t = 3)]
    pub random: usize,
}

#[derive(Debug, Args)]
pub struct AttackArgs {
    #[arg(long)]
    pub data: PathBuf,

    #[command(flatten)]
    pub model: ModelArgs,

    /// Truncation levels to attack, comma separated (defaults to none truncated).
    #[arg(long, value_delimiter = ',')]
    pub truncations: Vec<usize>,

    /// Sensitive covariate: the attacked attribute, and the column defining outliers.
    #[arg(long)]
    pub sensitive: String,

    /// TOML or JSON file with `[aia]`, `[mia]` and `[forest]` tables.
    #[arg(long)]
    pub config: Option<PathBuf>,

    #[command(flatten)]
    pub targets: TargetArgs,

    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Subcommand)]
pub enum AttackCommand {
    /// Attribute inference.
    Aia(AttackArgs),
    /// Membership inference.
    Mia(AttackArgs),
}

#[derive(Debug, Args)]
pub struct UtilityArgs {
    /// Real training data (for the train-on-real reference).
    #[arg(long)]
    pub real: PathBuf,

    #[arg(long)]
    pub test: PathBuf,

    /// Synthetic datasets, comma separated or repeated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub synthetic: Vec<PathBuf>,

    #[arg(long)]
    pub config: Option<PathBuf>,

    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct FidelityArgs {
    #[arg(long)]
    pub real: PathBuf,

    #[arg(long)]
    pub synthetic: PathBuf,

    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub data: PathBuf,

    #[arg(long)]
    pub test: PathBuf,

    #[command(flatten)]
    pub model: ModelArgs,

    #[arg(long, value_delimiter = ',', required = true)]
    pub truncations: Vec<usize>,

    #[arg(long, value_enum, default_value_t = PrivacyArg::Mab)]
    pub privacy: PrivacyArg,

    #[arg(long)]
    pub sensitive: String,

    /// Synthetic replicates per level for the utility score.
    #[arg(long, default_value_t = 50)]
    pub n_rep: usize,

    #[arg(long)]
    pub config: Option<PathBuf>,

    /// CSV with columns name,utility,privacy drawn as extra points.
    #[arg(long)]
    pub competitors: Option<PathBuf>,

    #[command(flatten)]
    pub targets: TargetArgs,

    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    #[arg(long)]
    pub manifest: PathBuf,

    /// Write outputs here instead of the recorded directory.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}
