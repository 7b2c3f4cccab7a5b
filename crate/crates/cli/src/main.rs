use std::io;
use std::process::ExitCode;

use clap::Parser;
use resample_cli::{execute, Cli, EXIT_OK};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = io::stdout();
    match execute(cli, &mut stdout.lock()) {
        Ok(()) => ExitCode::from(EXIT_OK),
        Err(e) => {
            eprintln!("resample: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
