use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use kuramoto_clusters::cli::{run, Cli, EXIT_OK, EXIT_USAGE};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::from(EXIT_OK as u8),
                _ => ExitCode::from(EXIT_USAGE as u8),
            };
        }
    };
    ExitCode::from(run(&cli) as u8)
}
