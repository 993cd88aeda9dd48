//! `hhc`: generate instances, run the solvers, compute indicators.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hhc_core::VariantId;

#[derive(Debug, Parser)]
#[command(name = "hhc", version, about = "Home health care routing and scheduling toolkit")]
struct Cli {
    /// Base seed; repeat r of `solve` uses seed + r.
    #[arg(long, global = true, env = "HHC_SEED", default_value_t = 0)]
    seed: u64,
    /// Worker threads (0 picks the number of cores).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Advisory per-run time limit, checked between iterations.
    #[arg(long, global = true)]
    time_limit_ms: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate an instance from a preset or a recipe file.
    Gen(GenArgs),
    /// Solve an instance, once per repeat.
    Solve(SolveArgs),
    /// Hypervolume and coverage of front files under shared normalization.
    Metrics(MetricsArgs),
    /// Exhaustive optimum of a small instance.
    Oracle(OracleArgs),
    /// Monte Carlo estimate of the expected recourse of a plan.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct Source {
    /// Named preset, see `--list-presets`.
    #[arg(long)]
    preset: Option<String>,
    /// Recipe as JSON.
    #[arg(long)]
    recipe: Option<PathBuf>,
    /// Print the preset names and exit.
    #[arg(long)]
    list_presets: bool,
}

#[derive(Debug, Args)]
struct GenArgs {
    #[command(flatten)]
    source: Source,
    /// Output path; stdout when absent.
    #[arg(short, long)]
    out: Option<PathBuf>,
    /// Regenerate with seed, seed + 1, ... until GVNS finds a feasible plan.
    #[arg(long)]
    feasible: bool,
    /// Model used by --feasible.
    #[arg(long, value_enum, default_value = "hard-msmtw", requires = "feasible")]
    variant: Variant,
    /// Seeds tried by --feasible.
    #[arg(long, default_value_t = 100, requires = "feasible")]
    attempts: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Algorithm {
    Gvns,
    Ga,
    Nsga2,
    Moead,
    Hybrid,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Variant {
    SoftMtw,
    HardMsmtw,
    SprPenalty,
    SprSkip,
    Multiobj,
}

impl From<Variant> for VariantId {
    fn from(v: Variant) -> Self {
        match v {
            Variant::SoftMtw => VariantId::SoftMtw,
            Variant::HardMsmtw => VariantId::HardMsmtw,
            Variant::SprPenalty => VariantId::SprPenalty,
            Variant::SprSkip => VariantId::SprSkip,
            Variant::Multiobj => VariantId::Multiobj,
        }
    }
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, value_enum)]
    alg: Algorithm,
    /// Defaults to multiobj for the multi-objective algorithms and
    /// hard-msmtw otherwise.
    #[arg(long, value_enum)]
    variant: Option<Variant>,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    repeat: u64,
    /// Results CSV; stdout when absent.
    #[arg(short, long)]
    out: Option<PathBuf>,
    /// Per-run fronts (multi-objective algorithms).
    #[arg(long)]
    front_out: Option<PathBuf>,
    /// Per-run hypervolume under normalization over all runs.
    #[arg(long)]
    indicators_out: Option<PathBuf>,
    /// Best solution over all runs, as JSON (single-objective algorithms).
    #[arg(long)]
    solution_out: Option<PathBuf>,
    /// Convergence trace CSV (single-objective algorithms).
    #[arg(long)]
    trace_out: Option<PathBuf>,
    /// Add wall-clock columns; output is then no longer reproducible.
    #[arg(long)]
    timing: bool,
    /// Use common random numbers in stochastic fitness.
    #[arg(long)]
    crn: bool,
    /// Override the stopping budget: non-improving iterations (gvns),
    /// generations (ga) or evaluations (nsga2, moead, hybrid).
    #[arg(long)]
    budget: Option<usize>,
    /// Override the population size (ga, nsga2, moead, hybrid).
    #[arg(long)]
    population: Option<usize>,
}

#[derive(Debug, Args)]
struct MetricsArgs {
    /// Front CSV files with f1, f2, f3 columns.
    #[arg(required = true)]
    fronts: Vec<PathBuf>,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct OracleArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, value_enum, default_value = "hard-msmtw")]
    variant: Variant,
    /// Enumerate the Pareto set of the three objectives instead.
    #[arg(long)]
    pareto: bool,
    /// Use the decoder's window rule instead of trying every window.
    #[arg(long)]
    decoder_windows: bool,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Solution JSON as written by `solve --solution-out`.
    #[arg(long)]
    solution: PathBuf,
    /// Recourse model; taken from the solution file when absent.
    #[arg(long, value_enum)]
    variant: Option<Variant>,
    #[arg(long, default_value_t = 100)]
    max_iter: usize,
    #[arg(long, default_value_t = 0.05)]
    epsilon: f64,
    #[arg(long, default_value_t = 10)]
    gap_window: usize,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

/// Failure with its exit code.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    NoSolution(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::NoSolution(_) => 3,
            Failure::Io(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::NoSolution(m) | Failure::Io(m) => m,
        }
    }
}

pub struct Globals {
    pub seed: u64,
    pub time_limit_ms: Option<u64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global() {
            eprintln!("hhc: cannot start thread pool: {e}");
        }
    }
    let g = Globals {
        seed: cli.seed,
        time_limit_ms: cli.time_limit_ms,
    };
    let result = match cli.command {
        Command::Gen(a) => commands::gen(&g, a),
        Command::Solve(a) => commands::solve(&g, a),
        Command::Metrics(a) => commands::metrics(a),
        Command::Oracle(a) => commands::oracle(a),
        Command::Simulate(a) => commands::simulate(&g, a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("hhc: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
