use std::process::ExitCode;

use clap::Parser;
use momt::cli::Cli;

fn main() -> ExitCode {
    ExitCode::from(momt::run::execute(Cli::parse()))
}
