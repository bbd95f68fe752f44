//! `quadlucas`: factor `gamma^n - 1`, build ledgers, print bound tables.
//!
//! Exit status: 0 success, 2 bad input (including roots of unity), 3 a
//! factorization ran out of budget (output is still written, flagged), 4 an
//! asserted check failed or an internal invariant broke, 1 I/O errors.

mod args;
mod commands;
mod emit;

use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = args::Cli::parse();
    if let Some(j) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(j as usize).build_global() {
            log::warn!("thread pool: {e}");
        }
    }
    match commands::run(&cli) {
        Ok(outcome) => ExitCode::from(outcome.exit_code()),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
