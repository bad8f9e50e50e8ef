use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "pomdp-cert", version, about = "Belief-space reachability and barrier certificates for POMDPs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Simulate belief trajectories and write them as CSV.
    Simulate(SimulateArgs),
    /// Over-approximate the reachable beliefs with sublevel sets.
    Reach(ReachArgs),
    /// Certify that the unsafe mass stays at or below a threshold at the horizon.
    VerifySafety(SafetyArgs),
    /// Certify a bound on the cumulative expected reward.
    VerifyOpt(OptArgs),
    /// Write a built-in model in the `.pomdp` format.
    BuildModel(BuildArgs),
    /// Write the first synthesis LP of a search in MPS format.
    ExportLp(ExportArgs),
    /// Re-validate a certificate file against a model.
    CheckCert(CheckArgs),
}

#[derive(Args, Debug, Clone)]
pub struct ModelArgs {
    /// `ad`, `ad-low`, `lattice`, or a path to a `.pomdp` file.
    #[arg(long)]
    pub model: String,
    /// Initial belief overriding the model's, as comma-separated probabilities.
    #[arg(long)]
    pub initial: Option<String>,
}

#[derive(Args, Debug, Clone)]
pub struct DegreeArgs {
    /// Search exactly this degree.
    #[arg(long)]
    pub degree: Option<u32>,
    /// Without `--degree`, try 1, 2, ... up to this degree.
    #[arg(long, default_value_t = 3)]
    pub max_degree: u32,
}

#[derive(Args, Debug, Clone)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// `paper` (no ads while `b1 + b2 <= 0.5`) or a policy file; actions are uniform when absent.
    #[arg(long)]
    pub policy: Option<String>,
    /// Comma-separated open-loop action names; caps the horizon at their count.
    #[arg(long, conflicts_with = "policy")]
    pub actions: Option<String>,
    #[arg(long, default_value_t = 100)]
    pub horizon: usize,
    #[arg(long, default_value_t = 100)]
    pub runs: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReachModeArg {
    Single,
    PerAction,
    Partition,
}

#[derive(Args, Debug, Clone)]
pub struct ReachArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// `paper` (no ads while `b1 + b2 <= 0.5`) or a policy file. Sets the sampling regime, and the
    /// partition for `--mode partition`.
    #[arg(long)]
    pub policy: Option<String>,
    #[arg(long, value_enum, default_value_t = ReachModeArg::PerAction)]
    pub mode: ReachModeArg,
    #[command(flatten)]
    pub degree: DegreeArgs,
    /// Sampled trajectories for the cloud.
    #[arg(long, default_value_t = 10_000)]
    pub runs: usize,
    #[arg(long, default_value_t = 100)]
    pub horizon: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// `cloud.csv,set.csv`: sampled beliefs and the evaluated simplex grid.
    #[arg(long, value_delimiter = ',', num_args = 1..=2)]
    pub out: Vec<PathBuf>,
    /// Grid subdivisions per simplex edge for the set CSV.
    #[arg(long, default_value_t = 50)]
    pub grid: usize,
    #[command(flatten)]
    pub cert: CertOut,
}

#[derive(Args, Debug, Clone)]
pub struct CertOut {
    /// Certificate file written after successful validation.
    #[arg(long, default_value = "out.cert")]
    pub cert: PathBuf,
    /// Sample points used by the validation.
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum BarrierModeArg {
    Monolithic,
    PerAction,
    Partition,
}

#[derive(Args, Debug, Clone)]
pub struct BarrierArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Affine constraint `g(b1..bn) >= 0` on the initial beliefs; repeatable.
    /// Replaces the single initial belief.
    #[arg(long = "initial-constraint")]
    pub initial_constraints: Vec<String>,
    #[arg(long)]
    pub tau: u32,
    #[arg(long, value_enum, default_value_t = BarrierModeArg::Monolithic)]
    pub mode: BarrierModeArg,
    /// `paper` (no ads while `b1 + b2 <= 0.5`) or a policy file, for `--mode partition`.
    #[arg(long)]
    pub policy: Option<String>,
    #[command(flatten)]
    pub degree: DegreeArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug, Clone)]
pub struct SafetyArgs {
    #[command(flatten)]
    pub barrier: BarrierArgs,
    /// Unsafe states by name or 0-based index; defaults to the last state.
    #[arg(long = "unsafe", value_delimiter = ',')]
    pub unsafe_states: Vec<String>,
    #[arg(long)]
    pub lambda: f64,
    #[command(flatten)]
    pub cert: CertOut,
}

#[derive(Args, Debug, Clone)]
pub struct OptArgs {
    #[command(flatten)]
    pub barrier: BarrierArgs,
    /// File with `R: action : state : * : * value` lines; the model's own
    /// rewards are used otherwise.
    #[arg(long, conflicts_with = "reward_const")]
    pub rewards: Option<PathBuf>,
    /// Same reward for every state and action.
    #[arg(long)]
    pub reward_const: Option<f64>,
    #[arg(long)]
    pub gamma: f64,
    /// Per-step bound as a polynomial in `t`; defaults to `gamma / (tau + 1)`.
    #[arg(long)]
    pub tube: Option<String>,
    #[command(flatten)]
    pub cert: CertOut,
}

#[derive(Args, Debug, Clone)]
pub struct BuildArgs {
    /// `ad`, `ad-low` or `lattice`.
    #[arg(long)]
    pub model: String,
    #[arg(long, default_value_t = 4)]
    pub width: usize,
    #[arg(long, default_value_t = 4)]
    pub height: usize,
    /// Learner's first hypothesis as `row,column` (1-based).
    #[arg(long, default_value = "1,1")]
    pub start: String,
    /// Target hypothesis as `row,column` (1-based).
    #[arg(long, default_value = "3,3")]
    pub target: String,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Clone)]
pub struct ExportArgs {
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub program: ExportProgram,
}

#[derive(Subcommand, Debug, Clone)]
pub enum ExportProgram {
    Reach(ExportReach),
    Safety(ExportSafety),
    Opt(ExportOpt),
}

#[derive(Args, Debug, Clone)]
pub struct ExportReach {
    #[command(flatten)]
    pub model: ModelArgs,
    /// With a policy the piecewise program is exported.
    #[arg(long)]
    pub policy: Option<String>,
    #[arg(long)]
    pub degree: u32,
}

#[derive(Args, Debug, Clone)]
pub struct ExportSafety {
    #[command(flatten)]
    pub barrier: BarrierArgs,
    #[arg(long = "unsafe", value_delimiter = ',')]
    pub unsafe_states: Vec<String>,
    #[arg(long)]
    pub lambda: f64,
}

#[derive(Args, Debug, Clone)]
pub struct ExportOpt {
    #[command(flatten)]
    pub barrier: BarrierArgs,
    #[arg(long, conflicts_with = "reward_const")]
    pub rewards: Option<PathBuf>,
    #[arg(long)]
    pub reward_const: Option<f64>,
    #[arg(long)]
    pub gamma: f64,
    #[arg(long)]
    pub tube: Option<String>,
}

#[derive(Args, Debug, Clone)]
pub struct CheckArgs {
    #[arg(long)]
    pub model: String,
    #[arg(long)]
    pub cert: PathBuf,
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}
