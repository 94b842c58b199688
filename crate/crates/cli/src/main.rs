mod args;
mod commands;
mod config;
mod plot;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;

use args::Cli;
use config::{write_outputs, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Core(#[from] cbsim::Error),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

fn run(cli: &Cli) -> Result<String, CliError> {
    let mut config = RunConfig::resolve(&cli.common, &cli.command)?;
    let outcome = commands::run(&cli.command, &mut config)?;
    let mut extra: Vec<(&str, String)> = outcome.extra;
    if cli.common.plot {
        if let Some(script) = plot::gnuplot_script(&outcome.result.protocol) {
            extra.push(("plot.gp", script));
        }
    }
    let result = write_outputs(&config, outcome.result, &extra)?;
    Ok(commands::summary(&result))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(summary) => {
            print!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("cbsim: error: {}", e.to_string().replace('\n', " "));
            ExitCode::FAILURE
        }
    }
}
