use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = wia_cli::Cli::parse();
    match wia_cli::run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
