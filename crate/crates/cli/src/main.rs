use std::process::ExitCode;

use clap::Parser;
use freegeo_cli::{run, RunConfig};

fn main() -> ExitCode {
    let config = RunConfig::parse();
    match run(&config) {
        Ok(outcome) => {
            if config.out.is_none() {
                print!("{}", outcome.report);
            }
            ExitCode::from(outcome.exit_code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
