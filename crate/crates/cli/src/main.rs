use std::process::ExitCode;

use clap::Parser;
use skinspec_cli::{run, thread_cap, Cli, Status, EXIT_INPUT_ERROR, EXIT_OK, EXIT_VERIFY_FAILED};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = match thread_cap() {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(EXIT_INPUT_ERROR);
        }
    };
    if let Some(n) = threads {
        // only fails if a pool already exists
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match run(&cli) {
        Ok(Status::Ok) => ExitCode::from(EXIT_OK),
        Ok(Status::VerificationFailed) => ExitCode::from(EXIT_VERIFY_FAILED),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_INPUT_ERROR)
        }
    }
}
