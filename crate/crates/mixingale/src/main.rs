use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use mixingale::config::{parse_config, BackendChoice, Suite};
use mixingale::process::DEFAULT_ATOM_CAP;
use mixingale::runner::{run, RunOptions, ATOM_CAP_ENV};

/// Run verification suites and weak-law experiments from a TOML config.
///
/// Exit codes: 0 all checks pass, 1 verification failure, 2 configuration
/// error, 3 resource cap exceeded.
#[derive(Debug, Parser)]
#[command(name = "mixingale", version, about)]
struct Cli {
    /// Path to the experiment config (TOML).
    config: PathBuf,

    /// Override the configured backend.
    #[arg(long, value_enum)]
    backend: Option<BackendChoice>,

    /// Override the configured check seed.
    #[arg(long)]
    seed: Option<u64>,

    /// Override the output directory.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Parse and echo the effective config without computing anything.
    #[arg(long)]
    dry_run: bool,

    /// Run only the named suite (repeatable); suites always execute in
    /// dependency order.
    #[arg(long = "suite", value_name = "NAME")]
    suites: Vec<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    let atom_cap = match std::env::var(ATOM_CAP_ENV) {
        Err(_) => DEFAULT_ATOM_CAP,
        Ok(raw) => match raw.parse::<usize>() {
            Ok(cap) if cap > 0 => cap,
            _ => {
                eprintln!("{ATOM_CAP_ENV}={raw}: expected a positive integer");
                return ExitCode::from(2);
            }
        },
    };

    let text = match std::fs::read_to_string(&cli.config) {
        Ok(text) => text,
        Err(err) => {
            eprintln!("{}: {err}", cli.config.display());
            return ExitCode::from(2);
        }
    };
    let config = match parse_config(&text) {
        Ok(config) => config,
        Err(err) => {
            eprintln!("{err}");
            return ExitCode::from(2);
        }
    };

    let suites = if cli.suites.is_empty() {
        None
    } else {
        let mut resolved = Vec::new();
        for name in &cli.suites {
            match Suite::from_name(name) {
                Some(suite) => resolved.push(suite),
                None => {
                    eprintln!(
                        "unknown suite {name:?}; expected one of {}",
                        Suite::ALL.map(|s| s.name()).join(", ")
                    );
                    return ExitCode::from(2);
                }
            }
        }
        Some(resolved)
    };

    let options = RunOptions {
        backend: cli.backend,
        seed: cli.seed,
        out_dir: cli.out,
        suites,
        atom_cap,
        dry_run: cli.dry_run,
    };

    match run(&config, &options) {
        Ok(outcome) => {
            print!("{}", outcome.summary);
            if let Some(path) = &outcome.csv_path {
                println!("trace: {}", path.display());
            }
            if outcome.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(err) => {
            eprintln!("{err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
