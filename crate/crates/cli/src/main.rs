use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use ergocube_cli::commands::{run, CliError, Command, RunOptions};
use ergocube_cli::config::{parse_config, ModeArg};

/// Exact experiments with finite commuting measure-preserving systems.
#[derive(Parser, Debug)]
#[command(name = "ergocube", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// Experiment config (TOML).
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Arithmetic mode; overrides the config.
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Output directory; overrides `params.out`.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Seed for random functions and the verify suite.
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// Largest joining support, in tuples.
    #[arg(long, value_name = "N")]
    cap: Option<usize>,
    /// Worker threads; defaults to the number of cores.
    #[arg(long, value_name = "N")]
    threads: Option<usize>,
}

fn main_inner(cli: Cli) -> Result<bool, CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("--threads: {e}")))?;
    }
    let cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
                path: path.clone(),
                source,
            })?;
            Some(parse_config(&text)?)
        }
        None if cli.command.needs_config() => {
            return Err(CliError::Usage(format!("{:?} needs --config PATH", cli.command)));
        }
        None => None,
    };
    let opts = RunOptions {
        mode: cli.mode,
        out: cli.out,
        seed: cli.seed,
        cap: cli.cap,
    };
    let outcome = run(cli.command, cfg.as_ref(), &opts)?;
    print!("{}", outcome.summary);
    Ok(!outcome.checks_failed)
}

fn main() -> ExitCode {
    match main_inner(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: some checks failed");
            ExitCode::from(5)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
