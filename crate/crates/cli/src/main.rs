use std::process::ExitCode;

use anyhow::Context;
use apienergy_cli::{run, Cli, CliError, ExitStatus};
use clap::Parser;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli).context("apienergy") {
        Ok(status) => ExitCode::from(status.code()),
        Err(err) => {
            eprintln!("{err:#}");
            let status = err
                .downcast_ref::<CliError>()
                .map_or(ExitStatus::Io, |e| e.status);
            ExitCode::from(status.code())
        }
    }
}
