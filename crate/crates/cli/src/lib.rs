//! Command-line front end: argument parsing, output writing and exit codes.

pub mod commands;
pub mod config;
pub mod failure;
pub mod pipeline;
pub mod report;
pub mod series_io;
pub mod tables;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::Parser;

use crate::commands::Outcome;
use crate::config::{Cli, Command, RunConfig};
use crate::failure::{Failure, EXIT_OK};

fn side_path(out: &Path, suffix: &str) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "report".into());
    out.with_file_name(format!("{stem}.{suffix}.csv"))
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn emit(outcome: &Outcome, cfg: &RunConfig) -> Result<(), Failure> {
    let doc = outcome.render(cfg.format)?;
    match &cfg.out {
        Some(path) => {
            write_file(path, &doc)?;
            for (suffix, table) in &outcome.side_tables {
                write_file(&side_path(path, suffix), &table.render())?;
            }
        }
        None => print!("{doc}"),
    }
    Ok(())
}

fn execute(command: &Command) -> Result<(), Failure> {
    let run = match command {
        Command::Verify(v) => &v.run,
        Command::Enumerate(a)
        | Command::Pi(a)
        | Command::Green(a)
        | Command::Infrared(a)
        | Command::Decompose(a)
        | Command::Bootstrap(a)
        | Command::Report(a) => a,
    };
    let cfg = RunConfig::from_args(run)?;
    if let Some(n) = cfg.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Usage(format!("cannot size the thread pool: {e}")))?;
    }
    let outcome = match command {
        Command::Enumerate(_) => commands::enumerate(&cfg)?,
        Command::Verify(v) => commands::verify(v, &cfg)?,
        Command::Pi(_) => commands::pi(&cfg)?,
        Command::Green(_) => commands::green(&cfg)?,
        Command::Infrared(_) => commands::infrared(&cfg)?,
        Command::Decompose(_) => commands::decompose_cmd(&cfg)?,
        Command::Bootstrap(_) => commands::bootstrap(&cfg)?,
        Command::Report(_) => report::report(&cfg)?,
    };
    emit(&outcome, &cfg)?;
    outcome.status
}

/// Parses `args`, runs the command and returns the process exit code.
/// Failures are reported as one JSON object on stderr.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli.command) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("{}", serde_json::to_string(&f.to_json()).expect("error values serialize"));
            f.exit_code()
        }
    }
}
