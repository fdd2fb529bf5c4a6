//! `isingc`: compile coupling graphs into global Ising operation sequences,
//! optimize them exactly, estimate their run time and simulate noisy QAOA.
//!
//! Exit codes: 0 success, 1 verification/parse failure, 2 solver timeout
//! with a valid incumbent, 3 usage error.

mod commands;
mod config;
mod failure;
mod manifest;
mod sweep;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::Config;
use failure::{CliResult, EXIT_OK, EXIT_USAGE};

#[derive(Debug, Parser)]
#[command(
    name = "isingc",
    version,
    about = "Global Ising operation compiler for coupling graphs"
)]
struct Cli {
    /// TOML configuration file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Seed for every random choice.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build a sequence with a closed-form construction.
    Compile(CompileArgs),
    /// Minimize the operation count (l0) or total strength (l1) exactly.
    Optimize(OptimizeArgs),
    /// Check that a sequence realizes a graph.
    Verify(VerifyArgs),
    /// Estimate the execution time of a sequence.
    Cost(CostArgs),
    /// Simulate depth-one QAOA for Max-Cut under noise.
    Simulate(SimulateArgs),
    /// Run one of the batch experiments and write CSV.
    Sweep(SweepArgs),
    /// Generate an Erdős–Rényi random graph.
    Gen(GenArgs),
}

#[derive(Debug, Args)]
pub struct CompileArgs {
    /// Graph file (edge list or JSON).
    pub graph: PathBuf,
    /// `stars` (unweighted graphs) or `edges`.
    #[arg(long, default_value = "stars")]
    pub method: String,
    /// How repeated rows are merged: `identical` or `signed`.
    #[arg(long, default_value = "identical")]
    pub merge: String,
    /// Write the sequence JSON here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    pub graph: PathBuf,
    /// `l0` (operation count) or `l1` (total strength).
    #[arg(long, default_value = "l0")]
    pub objective: String,
    /// Strength bound: `sum` (total weight) or `theorem`.
    #[arg(long)]
    pub big_m: Option<String>,
    /// Seconds before the best sequence found so far is returned.
    #[arg(long)]
    pub time_limit: Option<f64>,
    /// `support` (exact support search) or `bnb` (LP branch-and-bound).
    #[arg(long)]
    pub engine: Option<String>,
    /// Restrict the search to this many randomly chosen flip rows.
    #[arg(long)]
    pub subsample: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Sequence JSON.
    pub pulse: PathBuf,
    pub graph: PathBuf,
}

#[derive(Debug, Args)]
pub struct CostArgs {
    /// Sequence JSON; omit with `--worst-case`.
    #[arg(required_unless_present = "worst_case")]
    pub pulse: Option<PathBuf>,
    /// Cost the union-of-stars bound on this many vertices instead.
    #[arg(long, conflicts_with = "pulse")]
    pub worst_case: Option<usize>,
    #[arg(long)]
    pub t_pi: Option<f64>,
    #[arg(long)]
    pub t_ising_per_ion: Option<f64>,
    #[arg(long)]
    pub t_ms: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    pub graph: PathBuf,
    /// `cx` or `ms`.
    #[arg(long, default_value = "ms")]
    pub compilation: String,
    /// Sequence for `ms`; defaults to the canonical construction.
    #[arg(long)]
    pub pulse: Option<PathBuf>,
    /// Major error rate.
    #[arg(long, default_value_t = 0.0)]
    pub lambda: f64,
    /// Fixed angles; both or neither. Without them the angles are optimized.
    #[arg(long, requires = "beta")]
    pub gamma: Option<f64>,
    #[arg(long, requires = "gamma")]
    pub beta: Option<f64>,
    #[arg(long)]
    pub grid_res: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// fig_random_unweighted, fig_random_weighted, fig_worstcase or fig_noise.
    pub kind: String,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub graphs_per_p: Option<usize>,
    #[arg(long)]
    pub p_count: Option<usize>,
    #[arg(long)]
    pub time_limit: Option<f64>,
    #[arg(long)]
    pub max_n: Option<usize>,
    /// Comma-separated major error rates.
    #[arg(long, value_delimiter = ',')]
    pub lambda_grid: Option<Vec<f64>>,
    #[arg(long)]
    pub grid_res: Option<usize>,
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub n: usize,
    /// Edge probability.
    #[arg(long)]
    pub p: f64,
    /// Comma-separated weights drawn uniformly per edge; unit weights if absent.
    #[arg(long, value_delimiter = ',')]
    pub weights: Option<Vec<String>>,
    /// Emit JSON instead of the edge-list format.
    #[arg(long)]
    pub json: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn run(cli: Cli) -> CliResult<u8> {
    let mut config = Config::load(cli.config.as_deref())?;
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    match cli.command {
        Command::Compile(a) => commands::compile(&a, &config),
        Command::Optimize(a) => commands::optimize(&a, &mut config),
        Command::Verify(a) => commands::verify(&a),
        Command::Cost(a) => commands::cost(&a, &mut config),
        Command::Simulate(a) => commands::simulate(&a, &mut config),
        Command::Sweep(a) => sweep::run(&a, &mut config),
        Command::Gen(a) => commands::gen(&a, &config),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return ExitCode::from(if err.use_stderr() { EXIT_USAGE } else { EXIT_OK });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(failure) => {
            eprintln!("error: {failure}");
            ExitCode::from(failure.code)
        }
    }
}
