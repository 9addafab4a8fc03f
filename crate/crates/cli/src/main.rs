mod commands;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cayleycomm::Error;
use run::Settings;

/// Circulant topology search and communication simulators.
#[derive(Debug, Parser)]
#[command(name = "cayleycomm", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Number of agents (ring size N).
    #[arg(long, global = true)]
    n: Option<u32>,

    /// Maximum vertex degree; the offset budget is floor(dmax / 2).
    #[arg(long, global = true)]
    dmax: Option<u32>,

    /// Candidate pool: all coprime offsets, primes only, or an explicit list
    /// from the `pool_file` config key.
    #[arg(long, global = true, value_parser = ["all", "primes", "file"])]
    pool: Option<String>,

    /// Master seed for every random stream.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output root; artifacts land under <out>/<command>/<run name>/.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Gossip trials per topology.
    #[arg(long, global = true)]
    trials: Option<u32>,

    /// Comma-separated link failure rates, each in [0, 1).
    #[arg(long, global = true)]
    rates: Option<String>,

    /// Load simulation steps.
    #[arg(long, global = true)]
    steps: Option<u32>,

    /// Rayon thread count (0 = one per core).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Name the run directory "run" instead of a timestamp and omit the
    /// generation header from config.snapshot, making reruns byte-identical.
    #[arg(long, global = true)]
    no_timestamp: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Search for a low-diameter generator set with policy-gradient training.
    Optimize {
        /// Optional key=value config file.
        config: Option<PathBuf>,
    },
    /// Report diameter, path length, degree, propagation score, and Moore gap.
    Evaluate {
        /// Builtin name (expo, fibonacci, prime, ring, complete, broadcast)
        /// or a path to a generator set JSON file.
        topology: String,
    },
    /// Enumerate every generator set under the budget and keep the best.
    Bruteforce {
        /// Optional key=value config file.
        config: Option<PathBuf>,
    },
    /// Push gossip dissemination statistics per topology.
    Gossip {
        /// Optional key=value config file.
        config: Option<PathBuf>,
    },
    /// Connectivity and dissemination under random or distance-biased link
    /// removal.
    Robustness {
        /// Optional key=value config file.
        config: Option<PathBuf>,
    },
    /// Per-step transmission counts under sustained message injection.
    Load {
        /// Optional key=value config file.
        config: Option<PathBuf>,
    },
    /// Moore lower bound on diameter, with per-topology gaps when topologies
    /// are listed.
    Moore {
        /// Optional key=value config file.
        config: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Help and version requests are successes; bad usage is not.
            let code = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };

    env_logger::Builder::from_default_env()
        .format_timestamp(None)
        .init();

    if let Some(threads) = cli.threads {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if threads > 0 {
            builder = builder.num_threads(threads);
        }
        if let Err(err) = builder.build_global() {
            eprintln!("error: could not configure thread pool: {err}");
            return ExitCode::from(2);
        }
    }

    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            if matches!(err, Error::SearchCapExceeded { .. }) {
                eprintln!("hint: this size needs `cayleycomm optimize`, or raise the `cap` config key");
            }
            ExitCode::from(exit_code(&err))
        }
    }
}

fn dispatch(cli: Cli) -> cayleycomm::Result<()> {
    let flags = run::Flags {
        n: cli.n,
        dmax: cli.dmax,
        pool: cli.pool,
        seed: cli.seed,
        out: cli.out,
        trials: cli.trials,
        rates: cli.rates,
        steps: cli.steps,
        no_timestamp: cli.no_timestamp,
    };
    match cli.command {
        Command::Optimize { config } => {
            let settings = Settings::load(config.as_deref(), flags)?;
            commands::optimize(&settings)
        }
        Command::Evaluate { topology } => {
            let settings = Settings::load(None, flags)?;
            commands::evaluate(&settings, &topology)
        }
        Command::Bruteforce { config } => {
            let settings = Settings::load(config.as_deref(), flags)?;
            commands::bruteforce(&settings)
        }
        Command::Gossip { config } => {
            let settings = Settings::load(config.as_deref(), flags)?;
            commands::gossip(&settings)
        }
        Command::Robustness { config } => {
            let settings = Settings::load(config.as_deref(), flags)?;
            commands::robustness(&settings)
        }
        Command::Load { config } => {
            let settings = Settings::load(config.as_deref(), flags)?;
            commands::load(&settings)
        }
        Command::Moore { config } => {
            let settings = Settings::load(config.as_deref(), flags)?;
            commands::moore(&settings)
        }
    }
}

/// 1 for bad input (flags, config keys, impossible parameter combinations),
/// 2 for runtime failures (cap exceeded, I/O, divergence).
fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Config(_)
        | Error::ModulusTooSmall(_)
        | Error::EmptyGeneratorSet
        | Error::OffsetOutOfRange { .. }
        | Error::EmptyPool { .. }
        | Error::PoolTooSmall { .. }
        | Error::BaselineTooLarge { .. }
        | Error::NoMooreBound { .. } => 1,
        _ => 2,
    }
}
