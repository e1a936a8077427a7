//! `mabuchi`: existence certificates, extremal data, Ding functionals and
//! the Monge–Ampère solver from problem files.

mod commands;
mod error;
mod number;
mod potential;
mod problem;
mod report;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use commands::{Context, Outcome, SolveFiles};
use error::CliError;
use problem::Problem;

#[derive(Debug, Parser)]
#[command(name = "mabuchi", version, about = "Mabuchi metrics on Fano group compactifications")]
struct Cli {
    /// Comparison tolerance (decimal or p/q); zero by default in exact mode.
    #[arg(long, global = true)]
    tol: Option<String>,
    /// Force exact rational arithmetic.
    #[arg(long, global = true)]
    rational: bool,
    /// Omit the timestamp so identical inputs give identical bytes.
    #[arg(long, global = true)]
    reproducible: bool,
    /// Write the JSON document here instead of stdout.
    #[arg(long, global = true)]
    out: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Certify existence from the barycenter criterion.
    Check { problem: String },
    /// Extremal field, its potential and the constants c_X and C_X.
    Extremal { problem: String },
    /// Futaki invariant of a central vector.
    Futaki {
        problem: String,
        /// Comma separated coordinates, e.g. `1,-1/2`.
        #[arg(long, allow_hyphen_values = true)]
        y: String,
    },
    /// Reduced Ding functional.
    Ding {
        #[command(subcommand)]
        action: DingAction,
    },
    /// Minimize the modified Ding functional.
    Solve {
        problem: String,
        /// JSON solver options overriding the problem file.
        #[arg(long)]
        config: Option<String>,
        /// CSV of iter, D, residual, sup_norm.
        #[arg(long, default_value = "history.csv")]
        history: String,
        /// CSV of the final potential over the fundamental domain.
        #[arg(long)]
        potential_out: Option<String>,
    },
    /// Pair random chamber rays with b_X - 4rho.
    Probe {
        problem: String,
        #[arg(long)]
        rays: usize,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Independent estimates of the polytope moments.
    Oracle {
        #[command(subcommand)]
        action: OracleAction,
    },
}

#[derive(Debug, Subcommand)]
enum DingAction {
    /// Evaluate L_X, F and D_X at a potential.
    Eval {
        problem: String,
        /// CSV rows `y_1, ..., y_r, u` over the fundamental domain.
        #[arg(long)]
        potential: String,
    },
}

#[derive(Debug, Subcommand)]
enum OracleAction {
    /// Monte Carlo volume, barycenter and weighted barycenter.
    Mc {
        problem: String,
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn check_threads() -> Result<(), CliError> {
    match std::env::var("MABUCHI_THREADS") {
        Ok(v) if v.trim().parse::<usize>().map_or(true, |n| n == 0) => {
            Err(CliError::usage(format!("MABUCHI_THREADS must be a positive integer, got {v:?}")))
        }
        _ => Ok(()),
    }
}

fn run(cli: Cli) -> Result<Outcome, CliError> {
    check_threads()?;
    let mut ctx = Context { tol: cli.tol, rational: cli.rational, reproducible: cli.reproducible, seed: None };
    match cli.command {
        Command::Check { problem } => commands::check(&ctx, &Problem::read(&problem)?),
        Command::Extremal { problem } => commands::extremal(&ctx, &Problem::read(&problem)?),
        Command::Futaki { problem, y } => commands::futaki_cmd(&ctx, &Problem::read(&problem)?, &y),
        Command::Ding { action: DingAction::Eval { problem, potential } } => {
            commands::ding_eval(&ctx, &Problem::read(&problem)?, &potential)
        }
        Command::Solve { problem, config, history, potential_out } => {
            let files = SolveFiles { config: config.as_deref(), history: Some(&history), potential: potential_out.as_deref() };
            commands::solve_cmd(&ctx, &Problem::read(&problem)?, &files)
        }
        Command::Probe { problem, rays, seed } => {
            ctx.seed = seed;
            commands::probe(&ctx, &Problem::read(&problem)?, rays)
        }
        Command::Oracle { action: OracleAction::Mc { problem, samples, seed } } => {
            ctx.seed = seed;
            commands::oracle_mc(&ctx, &Problem::read(&problem)?, samples)
        }
    }
}

fn fail(err: &CliError) -> ExitCode {
    eprintln!("{}", err.to_json());
    ExitCode::from(err.code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail(&CliError::usage(e.to_string().trim_end())),
    };
    let out = cli.out.clone();
    match run(cli) {
        Ok(outcome) => {
            let text = format!("{}\n", outcome.json);
            match out {
                Some(path) => {
                    if let Err(e) = std::fs::write(&path, text) {
                        return fail(&CliError::io(&path, e));
                    }
                }
                None => print!("{text}"),
            }
            ExitCode::from(outcome.code)
        }
        Err(err) => fail(&err),
    }
}
