use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use randev_cli::args::Cli;
use randev_cli::commands;
use randev_cli::failure::EXIT_USAGE;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    match commands::run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(failure) => {
            eprintln!("randev: {failure}");
            ExitCode::from(failure.code)
        }
    }
}
