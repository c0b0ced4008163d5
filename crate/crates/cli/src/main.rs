mod args;
mod commands;
mod config;
mod sweep;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use depsim_core::Error;

use args::{Cli, Command};

fn run(cli: Cli) -> depsim_core::Result<()> {
    match cli.command {
        Command::Gen(a) => commands::cmd_gen(a),
        Command::Partition(a) => commands::cmd_partition(a),
        Command::Extract(a) => commands::cmd_extract(a),
        Command::Plan(a) => commands::cmd_plan(a),
        Command::Simulate(a) => commands::cmd_simulate(a),
        Command::Validate(a) => commands::cmd_validate(a),
        Command::Report(a) => commands::cmd_report(a),
        Command::Sweep(a) => sweep::cmd_sweep(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let detail = e.to_string();
            let first = detail.lines().next().unwrap_or("").trim_start_matches("error: ");
            eprintln!("ERROR input: {first}");
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ERROR {}: {}", e.category(), e.to_string().replace('\n', " "));
            ExitCode::from(if matches!(e, Error::Capacity { .. }) { 2 } else { 1 })
        }
    }
}
