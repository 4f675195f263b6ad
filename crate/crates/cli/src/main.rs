mod commands;
mod config;
mod error;
mod report;
mod setup;

use std::io::Write;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;

use crate::config::{parse_config, Cli, RunConfig};
use crate::error::{CliError, CliResult};

fn execute(config: &RunConfig) -> CliResult<bool> {
    let started = Instant::now();
    let mut report = commands::run(config)?;
    if config.threads != 1 {
        report.duration_seconds = Some(started.elapsed().as_secs_f64());
    }
    let bytes = report::emit(&report, config.format, config.table.as_deref())?;
    match &config.out {
        Some(path) => std::fs::write(path, &bytes)
            .map_err(|e| CliError::usage(format!("cannot write {}: {e}", path.display())))?,
        None => std::io::stdout()
            .write_all(&bytes)
            .map_err(|e| CliError::usage(format!("cannot write to standard output: {e}")))?,
    }
    Ok(report.pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = parse_config(cli).and_then(|config| {
        if config.threads > 0 {
            rayon::ThreadPoolBuilder::new()
                .num_threads(config.threads)
                .build_global()
                .map_err(|e| {
                    CliError::usage(format!("cannot start {} threads: {e}", config.threads))
                })?;
        }
        execute(&config)
    });
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("rkb: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
