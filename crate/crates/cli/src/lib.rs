//! Command-line front end: reproducible experiments over the brook
//! learners, with machine-readable artifacts.

pub mod args;
pub mod experiment;
pub mod report;

pub use args::{Cli, Command};

/// Dispatches a parsed command line.
pub fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Run(args) => experiment::cmd_run(&args),
        Command::Bench(args) => experiment::cmd_bench(&args),
        Command::Tune(args) => experiment::cmd_tune(&args),
        Command::Gen(args) => experiment::cmd_gen(&args),
    }
}
