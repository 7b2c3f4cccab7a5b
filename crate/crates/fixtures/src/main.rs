use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use resample_fixtures::{generate_from_path, DEFAULT_SEED};

/// Regenerates the synthetic input tables from the census county list.
#[derive(Parser)]
#[command(name = "fixturegen", version)]
struct Args {
    /// Census county list (state_fips,county_fips,state,name).
    #[arg(long, default_value = "fixtures/source/counties.csv")]
    source: PathBuf,
    /// Directory receiving the seven CSV tables.
    #[arg(long, default_value = "fixtures")]
    out: PathBuf,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let result = generate_from_path(&args.source, args.seed).and_then(|f| f.write_to(&args.out));
    match result {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("fixturegen: {e}");
            ExitCode::FAILURE
        }
    }
}
