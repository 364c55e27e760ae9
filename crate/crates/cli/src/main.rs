mod commands;

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;

/// Experiments on weakly coupled damped wave systems with modulus-of-continuity nonlinearities.
#[derive(Parser, Debug)]
#[command(name = "critwave", version)]
pub struct Cli {
    /// Output directory for every artifact.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Worker threads for parallel sections (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Seed for randomized checks and recorded in sweep summaries.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Dini verdict for a pair of moduli.
    Classify(ClassifyArgs),
    /// Critical partner q_c, σ and predicted decay exponents.
    Curve(CurveArgs),
    /// Linear decay rates of the damped wave flow.
    LinearDecay(LinearDecayArgs),
    /// Runs one simulation from a config file.
    Simulate(ConfigArg),
    /// Picard iteration of the Duhamel map.
    Picard(PicardArgs),
    /// Test-function ledger on a recorded trajectory.
    BlowupScan(BlowupArgs),
    /// Runs a parameter sweep.
    Sweep(SweepArgs),
    /// Markdown digest of a sweep directory.
    Report(ReportArgs),
}

#[derive(Args, Debug)]
pub struct ClassifyArgs {
    #[arg(long)]
    pub mu1: String,
    #[arg(long)]
    pub mu2: String,
    /// Exponent q_c; otherwise solved from --n and --p-c.
    #[arg(long)]
    pub q_c: Option<f64>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub p_c: Option<f64>,
    /// Upper integration limit.
    #[arg(long, default_value_t = 0.1)]
    pub c: f64,
}

#[derive(Args, Debug)]
pub struct CurveArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub p_c: f64,
}

#[derive(Args, Debug)]
pub struct LinearDecayArgs {
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    /// gaussian, gaussian-derivative or bump.
    #[arg(long, default_value = "gaussian")]
    pub profile: String,
    #[arg(long, default_value_t = 1.0)]
    pub width: f64,
    /// Defaults to 800 in 1D and 200 in 2D.
    #[arg(long)]
    pub t_max: Option<f64>,
    /// Grid points per axis.
    #[arg(long)]
    pub points: Option<usize>,
    /// Extra Gagliardo-Nirenberg Monte Carlo draws (j,m,θ,r,r1,r2) = (0,1,1/4,4,2,2); θ = 1/4 is what the scaling balance forces.
    #[arg(long, default_value_t = 0)]
    pub gn_draws: usize,
}

#[derive(Args, Debug)]
pub struct ConfigArg {
    #[arg(long)]
    pub config: PathBuf,
}

#[derive(Args, Debug)]
pub struct PicardArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, default_value_t = 8)]
    pub iterations: usize,
    /// Defaults to the config's t_max.
    #[arg(long)]
    pub horizon: Option<f64>,
}

#[derive(Args, Debug)]
pub struct BlowupArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// `R0,ratio,count`; defaults to 4·1.25^k up to the run's horizon.
    #[arg(long)]
    pub ladder: Option<String>,
    /// Free constant C0 inside θ.
    #[arg(long, default_value_t = 1.0)]
    pub c0: f64,
    /// Lower end of the ODE window; defaults to the first ladder point.
    #[arg(long)]
    pub r0: Option<f64>,
    /// Test-function exponent ν; defaults to the smallest admissible value.
    #[arg(long)]
    pub nu: Option<f64>,
    /// Cap of the convex Φ_q continuation used by the Jensen check.
    #[arg(long, default_value_t = 0.1)]
    pub phi_cap: f64,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[arg(long)]
    pub spec: PathBuf,
}

#[derive(Args, Debug)]
pub struct ReportArgs {
    /// Sweep directory; defaults to --out.
    #[arg(long)]
    pub dir: Option<PathBuf>,
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Err(e) = commands::run(cli) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
