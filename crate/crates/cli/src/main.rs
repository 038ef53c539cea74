mod config;
mod error;
mod output;
mod tasks;

use std::path::PathBuf;
use std::process::ExitCode;

use bittery::Temperature;
use clap::{Parser, Subcommand};

use config::Task;
use error::{CliError, CliResult};
use output::Output;
use tasks::Context;

/// Single-shot work extraction experiments.
#[derive(Parser)]
#[command(name = "bittery", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON experiment configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Directory for CSV and JSON artifacts.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Worker threads for independent points.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,

    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Bath temperature in energy units.
    #[arg(long = "kT", global = true, default_value_t = 1.0)]
    kt: f64,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Maximum extractable work for each (epsilon, scheme) pair.
    Maxwork,
    /// The same grid written as CSV.
    Sweep,
    /// Finite-step reset and withdrawal of one qubit.
    Landauer,
    /// Additional work absorbed by a ladder weight.
    Addwork,
    /// Energy, entropy and free-energy changes of the work stores.
    Ledger,
    /// Formula against the exact oracle.
    OracleVerify,
    /// Every acceptance criterion.
    VerifyAll,
}

impl Command {
    fn task(self) -> Option<Task> {
        match self {
            Command::Maxwork => Some(Task::Maxwork),
            Command::Sweep => Some(Task::Sweep),
            Command::Landauer => Some(Task::Landauer),
            Command::Addwork => Some(Task::Addwork),
            Command::Ledger => Some(Task::Ledger),
            Command::OracleVerify => Some(Task::OracleVerify),
            Command::VerifyAll => None,
        }
    }
}

fn run(cli: &Cli) -> CliResult<()> {
    let temp = Temperature::from_kt(cli.kt)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs.max(1))
        .build()
        .map_err(|e| CliError::Failed(format!("thread pool: {e}")))?;

    let Some(task) = cli.command.task() else {
        let out = Output::new(&cli.out, &format!("none seed={}", cli.seed))?;
        return tasks::verify_all(&Context { out, temp, pool, seed: cli.seed });
    };

    let loaded = match &cli.config {
        Some(path) => config::load(path)?,
        None if task == Task::OracleVerify => config::Loaded {
            config: serde_json::from_str("{}")?,
            digest: "none".into(),
        },
        None => return Err(CliError::Config(format!("--config is required for {}", task.name()))),
    };
    loaded.config.check_task(task)?;
    let ctx = Context { out: Output::new(&cli.out, &loaded.digest)?, temp, pool, seed: cli.seed };
    let cfg = &loaded.config;
    match task {
        Task::Maxwork => tasks::maxwork(cfg, &ctx),
        Task::Sweep => tasks::sweep(cfg, &ctx),
        Task::Landauer => tasks::landauer(cfg, &ctx),
        Task::Addwork => tasks::addwork(cfg, &ctx),
        Task::Ledger => tasks::ledger(cfg, &ctx),
        Task::OracleVerify => tasks::oracle_verify(cfg, &ctx),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
