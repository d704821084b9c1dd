//! Command-line front end. `main_with_args` parses, runs one command and
//! returns the exit status: 0 when every certificate holds, 1 when one fails,
//! 2 on input or validation errors.

pub mod args;
pub mod commands;
pub mod error;
pub mod report;

use std::ffi::OsString;

use clap::Parser;
use framemul::Tolerances;

use crate::args::{Cli, Format};
use crate::commands::{run, Context};
use crate::error::CliError;
use crate::report::{to_json, to_text, write_atomic, Output};

pub const TOLERANCE_ENV: &str = "FRAMEMUL_TOL";

fn tolerances_from_env() -> Result<Tolerances, CliError> {
    match std::env::var(TOLERANCE_ENV) {
        Ok(s) => s.parse().map_err(CliError::Tolerance),
        Err(_) => Ok(Tolerances::default()),
    }
}

fn execute(cli: &Cli) -> Result<i32, CliError> {
    let ctx = Context {
        seed: cli.seed,
        tol: tolerances_from_env()?,
    };
    let output = run(&cli.command, &ctx)?;
    let value = output.to_value();
    // Artifacts are inputs to other verbs, so they stay JSON whatever the format.
    let rendered = match (&output, cli.format) {
        (Output::Artifact(_), _) | (_, Format::Json) => to_json(&value),
        (_, Format::Text) => to_text(&value),
    };
    match &cli.out {
        Some(path) => write_atomic(path, &rendered)?,
        None => print!("{rendered}"),
    }
    let failed = output.failed();
    for c in &failed {
        eprintln!(
            "certificate failed: {} (claimed {:e}, measured {:e}, margin {:e})",
            c.name, c.claimed, c.measured, c.margin
        );
    }
    Ok(if failed.is_empty() { 0 } else { 1 })
}

pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}
