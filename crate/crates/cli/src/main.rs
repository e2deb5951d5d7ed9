use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = brook_cli::Cli::parse();
    match brook_cli::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
