//! `bandshift` command-line tool.

mod args;
mod commands;
mod error;

use clap::Parser;

use crate::args::{Cli, Command};
use crate::error::{exit, CliError};

fn run(cli: &Cli) -> Result<commands::Outcome, CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(usize::from(n))
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot start {n} worker threads: {e}")))?;
    }
    match &cli.command {
        Command::Timing(a) => commands::cmd_timing(a),
        Command::Simulate(a) => commands::cmd_simulate(a),
        Command::Detect(a) => commands::cmd_detect(a),
        Command::Analyze(a) => commands::cmd_analyze(a),
    }
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { exit::USAGE } else { exit::OK };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    match run(&cli) {
        Ok(out) => {
            if cli.json {
                println!("{}", serde_json::to_string_pretty(&out.json).expect("JSON values serialize"));
            } else {
                print!("{}", out.summary);
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
