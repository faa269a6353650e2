use std::path::PathBuf;
use std::process::ExitCode;

use afrai_cli::{inspect_automaton, run_experiment, task_defaults, CliError, EnvKind, ExperimentConfig};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "afrai", version, about = "Learn reward automata in grid worlds with Q-learning")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a multi-seed experiment and write CSV/DOT artifacts.
    Run(RunArgs),
    /// Print the transition table of a saved automaton (.fra).
    Inspect { path: PathBuf },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, value_enum, default_value = "office")]
    env: EnvKind,
    #[arg(long, default_value_t = 1)]
    task: u32,
    /// Comma-separated seeds, or `a..b` for a half-open range.
    #[arg(long, default_value = "0..10")]
    seeds: String,
    #[arg(long)]
    total_steps: Option<u64>,
    #[arg(long)]
    eplength: Option<usize>,
    #[arg(long, default_value_t = 0.1)]
    alpha: f64,
    #[arg(long, default_value_t = 0.9)]
    gamma: f64,
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    /// Episodes a membership query may use.
    #[arg(long, default_value_t = 500)]
    budget_c: usize,
    /// Grid layout JSON replacing the built-in map.
    #[arg(long)]
    map: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Keep steps with an empty label and zero reward in learner traces.
    #[arg(long)]
    no_compress_empty: bool,
}

fn parse_seeds(text: &str) -> Result<Vec<u64>, CliError> {
    let bad = || CliError::Field { field: "seeds", message: format!("cannot parse {text:?}") };
    if let Some((a, b)) = text.split_once("..") {
        let a: u64 = a.trim().parse().map_err(|_| bad())?;
        let b: u64 = b.trim().parse().map_err(|_| bad())?;
        return Ok((a..b).collect());
    }
    text.split(',').map(|s| s.trim().parse().map_err(|_| bad())).collect()
}

fn build_config(args: RunArgs) -> Result<ExperimentConfig, CliError> {
    let (eplength, total_steps) = task_defaults(args.env, args.task).ok_or(CliError::Field {
        field: "task",
        message: format!("no task {} in the {} world", args.task, args.env.name()),
    })?;
    let config = ExperimentConfig {
        env: args.env,
        task: args.task,
        seeds: parse_seeds(&args.seeds)?,
        total_steps: args.total_steps.unwrap_or(total_steps),
        eplength: args.eplength.unwrap_or(eplength),
        budget_c: args.budget_c,
        alpha: args.alpha,
        gamma: args.gamma,
        epsilon: args.epsilon,
        compress_empty: !args.no_compress_empty,
        map: args.map,
        out_dir: args.out,
    };
    config.validate()?;
    Ok(config)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => build_config(args).and_then(|config| {
            let results = run_experiment(&config)?;
            for r in &results {
                match r.convergence_step {
                    Some(s) => println!("seed {}: converged at step {s}, {} hypothesis states", r.seed, r.report.hypothesis.num_states()),
                    None => println!("seed {}: did not converge, {} hypothesis states", r.seed, r.report.hypothesis.num_states()),
                }
            }
            println!("wrote {}", config.out_dir.join("summary.csv").display());
            Ok(())
        }),
        Command::Inspect { path } => inspect_automaton(&path).map(|t| print!("{t}")),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                CliError::Field { .. } => 2,
                _ => 1,
            })
        }
    }
}
