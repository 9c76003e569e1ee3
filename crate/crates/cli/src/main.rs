//! `lexfit` — retrofit concept vectors to a lexicon graph and evaluate them.
//!
//! Exit codes: 0 success, 1 validation/data error, 2 I/O error.

mod ablate_cmd;
mod cli;
mod eval_cmd;
mod inspect_cmd;
mod io_util;
mod retrofit_cmd;

use std::process::ExitCode;

use clap::Parser;

use crate::cli::{Cli, Command};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Retrofit(args) => retrofit_cmd::run(args),
        Command::Eval(args) => eval_cmd::run(args),
        Command::Ablate(args) => ablate_cmd::run(args),
        Command::Inspect(args) => inspect_cmd::run(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
