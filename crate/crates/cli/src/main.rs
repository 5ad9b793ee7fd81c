//! `cfnormal`: generate digits of the constructed number, analyze digit streams, and run the
//! metric validations.
//!
//! Exit status: 0 success or PASS, 1 usage or input error, 2 validation FAIL, 3 step budget
//! exhausted (the checkpoint written on exit resumes the run).

mod analyze;
mod config;
mod generate;
mod validate;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::ConfigArgs;

#[derive(Debug, Parser)]
#[command(name = "cfnormal", version, about = "Absolutely normal, continued-fraction normal digits")]
struct Cli {
    #[command(flatten)]
    config: ConfigArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Emit cf digits (and base-d digits) of the constructed number.
    Generate(generate::Args),
    /// Discrepancy trajectories of a digit stream.
    Analyze(analyze::Args),
    /// Monte Carlo and exhaustive checks of the metric estimates.
    Validate(validate::Args),
}

/// Outcome of a command, mapped to the exit status.
pub enum Outcome {
    Ok,
    Fail,
    Budget,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let cfg = match config::Config::resolve(&cli.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let result = match cli.command {
        Command::Generate(a) => generate::run(&cfg, &a),
        Command::Analyze(a) => analyze::run(&cfg, &a),
        Command::Validate(a) => validate::run(&cfg, &a),
    };
    match result {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => ExitCode::from(2),
        Ok(Outcome::Budget) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
