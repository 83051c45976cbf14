//! `maxcop`: reproducible experiments with largest-claim mixture copulas.

mod args;
mod commands;
mod config;
mod error;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use serde_json::json;

use args::{Cli, Command, Format, GlobalArgs};
use commands::Globals;
use error::CliError;

const DEFAULT_SEED: u64 = 1;

fn run(cli: Cli) -> Result<(), CliError> {
    let file = cli.global.config.as_deref().map(config::load).transpose()?;
    let global: GlobalArgs = config::layer(&cli.global, file.as_ref(), None)?;
    let threads = global
        .threads
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if threads == 0 {
        return Err(error::config("--threads must be at least 1"));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| error::config(e.to_string()))?;
    let g = Globals {
        seed: global.seed.unwrap_or(DEFAULT_SEED),
        threads,
        format: global.format.unwrap_or(Format::Csv),
    };

    let name = cli.command.name();
    let section = Some(name);
    let f = file.as_ref();
    let outcome = match cli.command {
        Command::Fit(a) => commands::fit(&g, config::layer(&a, f, section)?),
        Command::Simulate(a) => commands::simulate(&g, config::layer(&a, f, section)?),
        Command::Dependence(a) => commands::dependence(&g, config::layer(&a, f, section)?),
        Command::Influence(a) => commands::influence(&g, config::layer(&a, f, section)?),
        Command::Premium(a) => commands::premium(&g, config::layer(&a, f, section)?),
        Command::Summarize(a) => commands::summarize_cmd(&g, config::layer(&a, f, section)?),
    }?;

    let resolved = json!({
        "command": name,
        "seed": g.seed,
        "threads": g.threads,
        "format": g.format,
        "out": global.out,
        name: outcome.resolved,
    });
    let resolved = serde_json::to_string_pretty(&resolved).map_err(|e| error::config(e.to_string()))? + "\n";
    match &global.out {
        Some(path) => {
            std::fs::write(path, &outcome.body)?;
            let mut sidecar = path.clone().into_os_string();
            sidecar.push(".config.json");
            std::fs::write(PathBuf::from(sidecar), resolved)?;
        }
        None => {
            std::io::stdout().write_all(&outcome.body)?;
            eprint!("{resolved}");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
