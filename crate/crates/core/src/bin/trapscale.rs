use std::process::ExitCode;

use clap::Parser;
use trapscale::cli::{run, Cli, Status};
use trapscale::rng::Runner;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let status = match run(cli, Runner::from_env()) {
        Ok(status) => status,
        Err(e) => {
            eprintln!("trapscale: {e}");
            Status::of_error(&e)
        }
    };
    ExitCode::from(status as u8)
}
