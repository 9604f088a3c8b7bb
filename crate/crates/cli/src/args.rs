//! Command-line grammar.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "condmix",
    version,
    about = "Sampling experiments and exact verification sweeps for conditional mixing"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Divergence traces of Langevin sampling on a mixture target.
    #[command(name = "experiment-gmm")]
    ExperimentGmm(GmmArgs),
    /// Terminal-point occupancy of independent restarted chains.
    #[command(name = "experiment-restart")]
    ExperimentRestart(RestartArgs),
    /// Randomized exact sweep over lazy Gibbs chains.
    #[command(name = "verify-hypercube")]
    VerifyHypercube(HypercubeArgs),
    /// Long-run exponential-moment bound for dissipative targets.
    #[command(name = "verify-moment-bound")]
    VerifyMomentBound(MomentArgs),
    /// Closed-form curvature bound vs finite-difference Hessians.
    #[command(name = "verify-hessian-bound")]
    VerifyHessianBound(HessianArgs),
    /// Mass-vs-closeness dichotomies along a sampling run.
    #[command(name = "verify-dichotomy")]
    VerifyDichotomy(DichotomyArgs),
    /// Calibration of the numerical Poincaré-constant oracle.
    #[command(name = "verify-poincare")]
    VerifyPoincare(PoincareArgs),
    /// `condmix verify <suite>`: aliases for the verify-* commands.
    Verify(VerifyArgs),
}

#[derive(Args)]
pub struct VerifyArgs {
    #[command(subcommand)]
    pub what: VerifyWhat,
}

#[derive(Subcommand)]
pub enum VerifyWhat {
    Hypercube(HypercubeArgs),
    MomentBound(MomentArgs),
    HessianBound(HessianArgs),
    Dichotomy(DichotomyArgs),
    Poincare(PoincareArgs),
}

pub fn resolve_out(out: &Option<PathBuf>, command: &str, tag: &str, seed: u64) -> PathBuf {
    match out {
        Some(p) => p.clone(),
        None => {
            let tag: String = tag
                .chars()
                .map(|c| if c.is_alphanumeric() { c } else { '_' })
                .collect();
            PathBuf::from(format!("condmix-out/{command}-{tag}-seed{seed}"))
        }
    }
}

#[derive(Args)]
pub struct GmmArgs {
    /// Target preset: nu1, nu2, nu3, or twowell.
    #[arg(long)]
    pub preset: Option<String>,
    /// Target config file (weights / means / covariance keys).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Step size (default 0.01).
    #[arg(long = "h")]
    pub h: Option<f64>,
    /// Iteration count (default: preset-specific).
    #[arg(long = "T")]
    pub iterations: Option<usize>,
    /// Particle count (default 100000).
    #[arg(long)]
    pub particles: Option<usize>,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Grid spec `lo,hi,bins[;lo,hi,bins]`.
    #[arg(long)]
    pub grid: Option<String>,
    /// Initial sampler: `uniform:lo,hi`, `gauss:sigma`, or `point:x1,...`.
    #[arg(long)]
    pub init: Option<String>,
    #[arg(long = "record-every")]
    pub record_every: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl GmmArgs {
    pub fn out_dir(&self, command: &str, tag: &str, seed: u64) -> PathBuf {
        resolve_out(&self.out, command, tag, seed)
    }
}

#[derive(Args)]
pub struct RestartArgs {
    #[arg(long)]
    pub preset: Option<String>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long = "h")]
    pub h: Option<f64>,
    /// Iterations per chain (default 1000).
    #[arg(long = "T")]
    pub iterations: Option<usize>,
    /// Comma-separated restart counts.
    #[arg(long, default_value = "1,10,2000")]
    pub restarts: String,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long)]
    pub init: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl RestartArgs {
    pub fn out_dir(&self, command: &str, tag: &str, seed: u64) -> PathBuf {
        resolve_out(&self.out, command, tag, seed)
    }
}

#[derive(Args)]
pub struct HypercubeArgs {
    /// Cube dimension for the randomized sweep.
    #[arg(long, default_value_t = 5)]
    pub d: usize,
    #[arg(long, default_value_t = 100)]
    pub instances: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Largest random integer energy level.
    #[arg(long = "max-level", default_value_t = 6)]
    pub max_level: u32,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct MomentArgs {
    /// Comma-separated dimensions.
    #[arg(long, default_value = "1,2,4")]
    pub dims: String,
    #[arg(long = "h", default_value_t = 0.05)]
    pub h: f64,
    #[arg(long = "T", default_value_t = 3000)]
    pub iterations: usize,
    #[arg(long, default_value_t = 2000)]
    pub particles: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct HessianArgs {
    #[arg(long, default_value_t = 50)]
    pub instances: usize,
    /// Evaluation points per instance.
    #[arg(long, default_value_t = 100)]
    pub points: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct DichotomyArgs {
    #[arg(long)]
    pub preset: Option<String>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Step size; defaults to 1/sqrt(T).
    #[arg(long = "h")]
    pub h: Option<f64>,
    #[arg(long = "T")]
    pub iterations: Option<usize>,
    /// Particle count (default 20000).
    #[arg(long)]
    pub particles: Option<usize>,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long)]
    pub grid: Option<String>,
    #[arg(long)]
    pub init: Option<String>,
    #[arg(long = "record-every")]
    pub record_every: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct PoincareArgs {
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
