use std::process::ExitCode;

use clap::Parser;
use optomech_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("optomech: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
