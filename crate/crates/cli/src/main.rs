mod args;
mod commands;

use args::{Cli, Command};
use clap::error::ErrorKind;
use clap::Parser;
use commands::Status;
use std::process::ExitCode;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    let result = match &cli.command {
        Command::Solve(a) => commands::solve(a),
        Command::Compare(a) => commands::compare(a),
        Command::Spectrum(a) => commands::spectrum(a),
        Command::SweepS(a) => commands::sweep_s(a),
        Command::Sensitivity(a) => commands::sensitivity(a),
        Command::Params(a) => commands::params(a),
    };
    match result {
        Ok(Status::Done) => ExitCode::SUCCESS,
        Ok(Status::NotConverged) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
