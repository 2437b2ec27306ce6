use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ratchetlab_core::Model;

/// Diffusion ratchets: closed-form speeds, simulation and verification.
#[derive(Parser, Debug)]
#[command(name = "ratchetlab", version, about)]
pub struct Cli {
    /// Root seed (decimal or 0x-prefixed hex). Falls back to RATCHETLAB_SEED,
    /// then to the config file, then to 0x5EED.
    #[arg(long, global = true, env = "RATCHETLAB_SEED", value_parser = parse_seed)]
    pub seed: Option<u64>,

    /// JSON file overriding the built-in defaults.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Worker threads for replicas; results do not depend on it.
    #[arg(long, global = true)]
    pub workers: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Print the closed-form asymptotic speed.
    Speed(SpeedArgs),
    /// Write a CSV table of both speeds over a grid of mu.
    Table(TableArgs),
    /// Simulate one ratchet path and write it as CSV.
    Simulate(SimulateArgs),
    /// Run a verification suite and print JSON verdicts.
    Verify(VerifyArgs),
    /// Simulate coupling times of two ratchets on shared noise.
    Couple(CoupleArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Bm,
    Ou,
}

impl From<ModelArg> for Model {
    fn from(m: ModelArg) -> Model {
        match m {
            ModelArg::Bm => Model::Bm,
            ModelArg::Ou => Model::Ou,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Speed,
    Clt,
    Invariant,
    Couple,
    Specfun,
}

#[derive(Args, Debug)]
pub struct SpeedArgs {
    #[arg(long, value_enum)]
    pub model: ModelArg,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub mu: f64,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct TableArgs {
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    pub mu_min: f64,
    #[arg(long, default_value_t = 8.0)]
    pub mu_max: f64,
    /// Number of grid points, endpoints included.
    #[arg(long, default_value_t = 81)]
    pub steps: usize,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub model: ModelArg,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub mu: f64,
    /// Horizon T.
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    /// Initial gap X_0 − R_0.
    #[arg(long, default_value_t = 0.0)]
    pub x0: f64,
    /// Path CSV `t,x,r`; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Jump events CSV `t,r_before,r_after,x`.
    #[arg(long)]
    pub jumps: Option<PathBuf>,
    /// Check the path invariants and fail if any is violated.
    #[arg(long)]
    pub validate: bool,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long, value_enum)]
    pub suite: Suite,
    #[arg(long, value_enum, default_value = "bm")]
    pub model: ModelArg,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub mu: f64,
    /// Chain steps (speed, invariant) or replicas (clt, couple).
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    /// Also write the verdicts (JSON lines) to this file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CoupleArgs {
    #[arg(long, value_enum)]
    pub model: ModelArg,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub mu: f64,
    #[arg(long, default_value_t = 1.0)]
    pub x_hi: f64,
    #[arg(long, default_value_t = 0.0)]
    pub x_lo: f64,
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    /// CSV `k,time,censored`; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn parse_seed(s: &str) -> Result<u64, String> {
    let s = s.trim();
    let parsed = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => s.parse(),
    };
    parsed.map_err(|e| format!("invalid seed '{s}': {e}"))
}
