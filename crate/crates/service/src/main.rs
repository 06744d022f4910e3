use std::process::ExitCode;

use clap::Parser;
use mapperscope::cli::Cli;

fn main() -> ExitCode {
    match mapperscope::run(Cli::parse()) {
        Ok(text) => {
            if let Some(t) = text {
                print!("{t}");
            }
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("{}", err.to_json());
            ExitCode::FAILURE
        }
    }
}
