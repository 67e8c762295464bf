use std::process::ExitCode;

use clap::Parser;
use kpp_fronts_cli::{run, Cli};

fn main() -> ExitCode {
    // clap exits with status 2 on usage errors by itself
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
