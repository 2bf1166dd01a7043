use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;

/// Cut-and-project Bregman solvers for sparse recovery experiments.
#[derive(Parser, Debug)]
#[command(name = "bregcut", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a seeded problem instance and write it as JSON.
    Generate(GenerateArgs),
    /// Run the cut-and-project solver on a problem file.
    Solve(SolveArgs),
    /// Compute a reference optimum with the FDPG baseline.
    Reference(ReferenceArgs),
    /// Run the randomized property suites.
    Check(CheckArgs),
    /// Run several step-size rules on one problem and summarize them.
    Compare(CompareArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum NoiseArg {
    None,
    Gaussian,
    Uniform,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum KernelArg {
    Elasticnet,
    Quadratic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, ValueEnum)]
pub enum RuleArg {
    Exact,
    Constant,
    Dynamic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ConstraintArg {
    Point,
    L2ball,
    Linfbox,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FaultArg {
    MinShrink,
    Overshoot,
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    #[arg(long)]
    pub m: usize,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub sparsity: usize,
    #[arg(long, value_enum, default_value = "none")]
    pub noise: NoiseArg,
    /// Radius factor c in σ = c·‖b − b^σ‖.
    #[arg(long, default_value_t = 1.0)]
    pub noise_scale: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

/// Problem and model selection shared by the solving commands.
#[derive(Args, Debug)]
pub struct ModelArgs {
    #[arg(long)]
    pub problem: PathBuf,
    #[arg(long, value_enum, default_value = "elasticnet")]
    pub kernel: KernelArg,
    #[arg(long, value_enum, default_value = "point")]
    pub constraint: ConstraintArg,
    /// Overrides the ℓ₁ weight stored in the problem file.
    #[arg(long)]
    pub lambda: Option<f64>,
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, value_enum, default_value = "exact")]
    pub stepsize: RuleArg,
    /// Step for the constant rule; defaults to μ/L.
    #[arg(long)]
    pub t: Option<f64>,
    /// Cap dynamic steps just below 2μ/L.
    #[arg(long)]
    pub clamp: bool,
    #[arg(long, default_value_t = 20_000)]
    pub max_iters: usize,
    /// Gradient-norm stopping threshold; defaults to 1e-9·(1 + ‖Aᵀb‖).
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ReferenceArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 200_000)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1000)]
    pub cases: usize,
    /// Negative control: run the suites against a broken ingredient.
    #[arg(long, value_enum, hide = true)]
    pub inject_fault: Option<FaultArg>,
}

#[derive(Args, Debug)]
pub struct CompareArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, value_enum, value_delimiter = ',', num_args = 0..)]
    pub rules: Vec<RuleArg>,
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long)]
    pub clamp: bool,
    #[arg(long, default_value_t = 20_000)]
    pub max_iters: usize,
    #[arg(long)]
    pub tol: Option<f64>,
    /// Iteration budget for the FDPG reference row; 0 skips it.
    #[arg(long, default_value_t = 200_000)]
    pub reference_iters: usize,
    #[arg(long, default_value_t = 1e-10)]
    pub reference_tol: f64,
    #[arg(long)]
    pub out_dir: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Generate(a) => commands::generate(&a),
        Command::Solve(a) => commands::solve(&a),
        Command::Reference(a) => commands::reference(&a),
        Command::Check(a) => commands::check(&a),
        Command::Compare(a) => commands::compare(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
