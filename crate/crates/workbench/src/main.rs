use std::process::ExitCode;

use clap::Parser;

mod cli;

use cli::{Cli, Command, UsageError};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    let result = match cli.command {
        Command::Simulate(args) => cli::simulate::run(args),
        Command::Metrics(args) => cli::offline::metrics(args),
        Command::Partition(args) => cli::offline::partition(args),
        Command::Advantages(args) => cli::offline::advantages(args),
        Command::MockEmbed(args) => cli::mock_embed(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            if err.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
