#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod error;
mod plot;
mod run;
mod trace;

use std::path::PathBuf;
use std::process::ExitCode;

use active_altruism::StrategyKind;
use clap::{Args, Parser, Subcommand};

use crate::error::CliError;

/// Active altruism learning in two-player Stackelberg games.
#[derive(Debug, Parser)]
#[command(name = "altruism", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run closed-loop episodes and write their traces.
    Run(RunArgs),
    /// Render SVG figures from a finished run directory.
    Plot {
        /// Directory holding trace.csv, belief.jsonl and summary.json.
        dir: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Scenario TOML file.
    #[arg(long)]
    pub scenario: PathBuf,
    /// Exploration strategies; several values sweep.
    #[arg(long, value_delimiter = ',')]
    pub strategy: Vec<StrategyKind>,
    /// Weight on the exploration bonus.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// True altruism of the follower; several values sweep.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub alpha: Vec<f64>,
    /// Episode length in planner steps.
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "runs")]
    pub out: PathBuf,
    /// Also write SVG figures for every run.
    #[arg(long)]
    pub plots: bool,
    /// Price the risk of the follower taking the leader role.
    #[arg(long)]
    pub conflict_aware: bool,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(CliError::EXIT_CODE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Run(args) => run::execute(&args),
        Command::Plot { dir } => plot::render_dir(&dir).map(|_| run::Status::Clean),
    };
    match result {
        Ok(run::Status::Clean) => ExitCode::SUCCESS,
        Ok(run::Status::Contradictions(n)) => {
            eprintln!("warning: {n} inference contradiction(s); see belief.jsonl");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(CliError::EXIT_CODE)
        }
    }
}
