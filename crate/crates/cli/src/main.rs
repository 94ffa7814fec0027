use std::process::ExitCode;

use bifbm_cli::{run, RunConfig};
use clap::Parser;

fn main() -> ExitCode {
    let config = RunConfig::parse();
    match run(&config) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("bifbm: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
