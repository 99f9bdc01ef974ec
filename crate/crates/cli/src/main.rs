use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use catlab::experiment::{self, ExperimentConfig, RunOptions};
use catlab::{Error, Exec};

const SEED_ENV: &str = "CATLAB_SEED";

#[derive(Parser)]
#[command(name = "catlab", version, about = "Catalytic quantum communication experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment config and write CSV plus JSON.
    Run {
        config: PathBuf,
        /// Overrides the config seed and CATLAB_SEED.
        #[arg(long)]
        seed: Option<u64>,
        /// Caps dense-construction dimensions.
        #[arg(long)]
        budget: Option<usize>,
        /// CSV path; the JSON is written alongside.
        #[arg(long, short)]
        output: Option<PathBuf>,
        /// Evaluate parameter points on one thread.
        #[arg(long)]
        sequential: bool,
    },
    /// Run the built-in invariant suites.
    Selftest,
    /// Fidelity, purified distance and D_max between two JSON state files.
    Measure { rho: PathBuf, sigma: PathBuf },
}

enum Failure {
    Validation(Error),
    Invariant(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NoConvergence(_) => Failure::Invariant(e.to_string()),
            e => Failure::Validation(e),
        }
    }
}

fn env_seed() -> Result<Option<u64>, Failure> {
    match std::env::var(SEED_ENV) {
        Ok(s) => s.trim().parse().map(Some).map_err(|_| {
            Failure::Validation(Error::InvalidInput(format!(
                "{SEED_ENV}: expected an unsigned integer, got {s:?}"
            )))
        }),
        Err(_) => Ok(None),
    }
}

fn run(
    config: PathBuf,
    seed: Option<u64>,
    budget: Option<usize>,
    output: Option<PathBuf>,
    sequential: bool,
) -> Result<(), Failure> {
    let mut cfg = ExperimentConfig::from_file(&config)?;
    if let Some(s) = seed.or(env_seed()?) {
        cfg.seed = s;
    }
    if budget.is_some() {
        cfg.budget = budget;
    }
    if let Some(out) = output {
        cfg.output_path = out.to_string_lossy().into_owned();
    }
    let exec = if sequential { Exec::Sequential } else { Exec::Parallel };
    let out = experiment::run(&cfg, RunOptions { exec })?;
    let csv = PathBuf::from(&cfg.output_path);
    experiment::write_outputs(&out, &csv)?;
    println!(
        "{}: {} rows -> {} ({:.2}s)",
        cfg.experiment,
        out.rows.len(),
        csv.display(),
        out.metadata.wall_time_s
    );
    match out.violations() {
        0 => Ok(()),
        n => Err(Failure::Invariant(format!("{n} rows violated a checked invariant"))),
    }
}

fn selftest() -> Result<(), Failure> {
    let report = experiment::selftest();
    println!("{report}");
    if report.ok() {
        Ok(())
    } else {
        Err(Failure::Invariant(format!("{} self-test cases failed", report.failed())))
    }
}

fn measure(rho: PathBuf, sigma: PathBuf) -> Result<(), Failure> {
    let a = experiment::load_state(&rho)?;
    let b = experiment::load_state(&sigma)?;
    let r = experiment::measure(&a, &b)?;
    println!("fidelity          {}", r.fidelity);
    println!("purified_distance {}", r.purified_distance);
    println!("dmax              {}", r.dmax);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            config,
            seed,
            budget,
            output,
            sequential,
        } => run(config, seed, budget, output, sequential),
        Command::Selftest => selftest(),
        Command::Measure { rho, sigma } => measure(rho, sigma),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(Failure::Invariant(msg)) => {
            eprintln!("invariant failure: {msg}");
            ExitCode::from(2)
        }
    }
}
