use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use snlevy::sim::StrategySpec;

#[derive(Debug, Parser)]
#[command(
    name = "snlevy",
    version,
    about = "Scale functions and de Finetti's dividend problem for spectrally negative Lévy processes"
)]
pub struct Cli {
    /// Directory that receives CSV artifacts and the run manifest.
    #[arg(long = "out", global = true, default_value = "snlevy-out")]
    pub output_dir: PathBuf,

    /// Tolerance override `key=value` (hjb_rel, second_diff, derivative, laplace, mc_sigmas).
    #[arg(long = "tol", global = true, value_parser = parse_override)]
    pub tolerances: Vec<(String, f64)>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate W^(q), its derivatives and u_q, with Laplace-identity residuals.
    ComputeScale(ScaleArgs),
    /// Certify jump-structure hypotheses and the shape conclusions they imply.
    AnalyzeShape(ScaleArgs),
    /// Locate the optimal barrier a* and check the HJB inequalities.
    SolveDefinetti(SolveArgs),
    /// Monte Carlo value of a dividend strategy.
    Simulate(SimulateArgs),
    /// Run the bundled acceptance suite on the gallery models.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Model file (TOML).
    #[arg(long)]
    pub model: PathBuf,
    /// Discount rate.
    #[arg(long)]
    pub q: f64,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    /// Right end of the grid.
    #[arg(long, default_value_t = 10.0)]
    pub x_max: f64,
    /// Uniform grid points.
    #[arg(long, default_value_t = 2048)]
    pub points: usize,
    /// Inversion algorithm: auto, euler, talbot.
    #[arg(long, default_value = "auto")]
    pub algorithm: String,
}

#[derive(Debug, Args)]
pub struct ScaleArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Residual points across [0, x_max].
    #[arg(long, default_value_t = 200)]
    pub hjb_points: usize,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// `barrier:a=<v>`, `threshold:b=<v>,rate=<v>` or `none`.
    #[arg(long)]
    pub strategy: StrategySpec,
    /// Initial reserve.
    #[arg(long)]
    pub x0: f64,
    #[arg(long, default_value_t = 10_000)]
    pub paths: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Simulation horizon; defaults to 40/q.
    #[arg(long)]
    pub horizon: Option<f64>,
    /// Use the approximate time-stepped scheme with this step.
    #[arg(long)]
    pub euler_step: Option<f64>,
    /// Small-jump cutoff for the time-stepped scheme.
    #[arg(long, default_value_t = 0.01)]
    pub cutoff: f64,
    /// Further strategies compared with `--strategy` on common random numbers.
    #[arg(long = "compare")]
    pub compare: Vec<StrategySpec>,
    /// Write per-path outcomes (at most 10,000 rows).
    #[arg(long)]
    pub per_path: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Paths per initial reserve in the Monte Carlo cross-check.
    #[arg(long, default_value_t = 200_000)]
    pub paths: usize,
    /// Paths per strategy in the barrier-dominance comparison.
    #[arg(long, default_value_t = 50_000)]
    pub dominance_paths: usize,
}

fn parse_override(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| format!("expected key=value, got `{s}`"))?;
    let v: f64 = v.trim().parse().map_err(|_| format!("`{v}` is not a number"))?;
    Ok((k.trim().to_string(), v))
}
