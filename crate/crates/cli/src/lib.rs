//! Command-line front end: `mqr spectrum | roots | wavefunction | verify | sweep`.
//!
//! Exit codes: 0 success, 1 internal error, 2 invalid input, 3 no allowed
//! root, 4 verification failure.

pub mod args;
pub mod commands;
pub mod error;
pub mod table;

use std::io::Write;

use crate::args::Format;
use crate::commands::{render, RunConfig};
use crate::error::CliError;
use crate::table::Table;

/// Runs the CLI on `argv` (program name first) and returns the exit code.
pub fn run(argv: &[String]) -> u8 {
    let cli = match args::parse_with_config(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run_parsed(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn run_parsed(cli: args::Cli) -> Result<u8, CliError> {
    let with_meta = !cli.opts.no_meta;
    let format = cli.opts.format.unwrap_or(Format::Csv);
    let out = cli.opts.out.clone();
    let (table, code) = if let Some(path) = &cli.opts.from_json {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::invalid(format!("cannot read {}: {e}", path.display())))?;
        (Table::from_json(&text)?, 0)
    } else {
        let cfg = RunConfig::resolve(cli.command, cli.opts)?;
        let outcome = commands::execute(&cfg)?;
        (outcome.table, outcome.exit_code)
    };
    let text = render(&table, format, with_meta);
    match out {
        Some(path) => std::fs::write(&path, text)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
        }
    }
    Ok(code)
}
