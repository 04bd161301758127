use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use vesselpower_core::neural::Activation;
use vesselpower_core::{Family, Mode};

#[derive(Debug, Parser)]
#[command(name = "vesselpower", version, about = "Hybrid main-engine power prediction")]
pub struct Cli {
    /// Seed for data generation, splitting, initialization and shuffling.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Directory receiving every output file.
    #[arg(long, global = true, default_value = ".")]
    pub out_dir: PathBuf,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic voyage dataset with ground truth and sea trials.
    GenData(GenDataArgs),
    /// Fit ballast and laden power curves from a sea-trial CSV.
    FitBaseline(FitBaselineArgs),
    /// Train one model variant.
    Train(TrainArgs),
    /// Compute MAE and RMSE per split for a trained model.
    Evaluate(EvaluateArgs),
    /// Random hyperparameter search minimizing test RMSE.
    Hpo(HpoArgs),
    /// Export the speed sweep for a pure and a hybrid model.
    Sweep(SweepArgs),
    /// Run the built-in numerical checks.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Gbt,
    Nn,
    Pinn,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Gbt => Family::Gbt,
            FamilyArg::Nn => Family::Nn,
            FamilyArg::Pinn => Family::Pinn,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Pure,
    #[value(alias = "residual")]
    Hybrid,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Pure => Mode::Pure,
            ModeArg::Hybrid => Mode::Hybrid,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ActivationArg {
    Tanh,
    Identity,
}

impl From<ActivationArg> for Activation {
    fn from(a: ActivationArg) -> Self {
        match a {
            ActivationArg::Tanh => Activation::Tanh,
            ActivationArg::Identity => Activation::Identity,
        }
    }
}

#[derive(Debug, Args)]
pub struct GenDataArgs {
    /// Generator configuration (JSON); built-in defaults when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Number of records, overriding the configuration.
    #[arg(long)]
    pub n: Option<usize>,
}

#[derive(Debug, Args)]
pub struct FitBaselineArgs {
    #[arg(long)]
    pub sea_trial: PathBuf,
}

/// Dataset and split shared by the training-side commands.
#[derive(Debug, Args)]
pub struct DataArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Split manifest; derived from `--seed` when omitted.
    #[arg(long)]
    pub split: Option<PathBuf>,
    /// Sea-trial baseline JSON, required for hybrid models.
    #[arg(long)]
    pub baseline: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    #[arg(long, value_enum)]
    pub family: Option<FamilyArg>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// Named hyperparameter preset, e.g. `table2-hybrid`.
    #[arg(long)]
    pub preset: Option<String>,

    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub max_depth: Option<usize>,
    #[arg(long)]
    pub n_estimators: Option<usize>,
    #[arg(long)]
    pub l1_alpha: Option<f64>,
    #[arg(long)]
    pub l2_lambda: Option<f64>,
    #[arg(long)]
    pub min_samples_leaf: Option<usize>,

    #[arg(long)]
    pub hidden_layers: Option<usize>,
    #[arg(long)]
    pub neurons: Option<usize>,
    #[arg(long, value_enum)]
    pub activation: Option<ActivationArg>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub full_batch_limit: Option<usize>,

    /// Physics-loss weight.
    #[arg(long)]
    pub lambda_phys: Option<f64>,
    /// Propeller-law coefficient; estimated from the training split when omitted.
    #[arg(long)]
    pub c_prop: Option<f64>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub model: ModelArgs,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub model: PathBuf,
}

#[derive(Debug, Args)]
pub struct HpoArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, value_enum)]
    pub family: FamilyArg,
    #[arg(long, value_enum, default_value = "pure")]
    pub mode: ModeArg,
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
    /// Training epochs per network trial.
    #[arg(long, default_value_t = 1000)]
    pub epochs: usize,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub pure: PathBuf,
    #[arg(long)]
    pub hybrid: PathBuf,
    #[arg(long, default_value_t = 5.0)]
    pub wind_speed: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub trim: f64,
    /// Draft in metres; the baseline's ballast draft when omitted.
    #[arg(long)]
    pub draft: Option<f64>,
    #[arg(long, default_value_t = 0.5)]
    pub step: f64,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Baseline JSON to check in addition to the built-in one.
    #[arg(long)]
    pub baseline: Option<PathBuf>,
}
