//! `readscroll`: ingest scroll logs, filter, extract features, classify
//! readability level and run the statistical analyses.
//!
//! The binary is a thin wrapper around [`main`]; [`execute`] runs one
//! invocation in-process and returns the written paths.

mod commands;
mod fail;
mod output;
mod params;

use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

pub use fail::{CliError, EXIT_DATA, EXIT_INTERNAL, EXIT_USAGE};
use params::{Params, SynthParams};

#[derive(Parser)]
#[command(
    name = "readscroll",
    version,
    about = "Readability analysis from scroll interaction logs"
)]
struct Cli {
    /// Output directory.
    #[arg(long, global = true, env = "READSCROLL_OUT", default_value = "readscroll-out")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Convert a foreign export into canonical session and participant files.
    Ingest(Params),
    /// Apply the engagement rule and write the engagement report.
    Filter(Params),
    /// Per-session interaction measures, raw and normalized.
    Features(Params),
    /// Per-article lexical and readability features.
    TextFeatures(Params),
    /// Per-text feature matrix for one feature selection.
    Aggregate(Params),
    /// Cross-validate the level classifier on one feature selection.
    Classify(Params),
    /// Level differences, score correlations, proficiency and speed tables.
    Analyze(Params),
    /// Every table and figure CSV in one directory.
    Report(Params),
    /// Generate a seeded synthetic cohort in the input layout.
    Synth(SynthParams),
}

fn run(cli: Cli) -> Result<Vec<PathBuf>, CliError> {
    if let Command::Synth(p) = &cli.command {
        let header = format!("# config={} seed={}\n", p.config_hash(), p.seed);
        return output::publish(&cli.out, &header, &commands::synth(p)?);
    }
    let (params, f): (&Params, fn(&Params) -> Result<_, CliError>) = match &cli.command {
        Command::Ingest(p) => (p, commands::ingest),
        Command::Filter(p) => (p, commands::filter),
        Command::Features(p) => (p, commands::features),
        Command::TextFeatures(p) => (p, commands::text_features),
        Command::Aggregate(p) => (p, commands::aggregate),
        Command::Classify(p) => (p, commands::classify),
        Command::Analyze(p) => (p, commands::analyze),
        Command::Report(p) => (p, commands::report),
        Command::Synth(_) => unreachable!("handled above"),
    };
    params.validate()?;
    let header = format!("# config={} seed={}\n", params.config_hash()?, params.seed);
    let artifacts = f(params)?;
    output::publish(&cli.out, &header, &artifacts)
}

fn parse<I, T>(args: I) -> Result<Cli, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    Cli::try_parse_from(args)
}

fn usage_line(e: &clap::Error) -> CliError {
    let first = e
        .to_string()
        .lines()
        .next()
        .unwrap_or_default()
        .trim_start_matches("error: ")
        .to_string();
    CliError::usage(first)
}

/// Runs one invocation; `args` includes the program name.
pub fn execute<I, T>(args: I) -> Result<Vec<PathBuf>, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run(parse(args).map_err(|e| usage_line(&e))?)
}

/// Parses the process arguments, runs, prints written paths to stdout and
/// a single error line to stderr.
pub fn main() -> ExitCode {
    let cli = match parse(std::env::args_os()) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            eprintln!("{}", usage_line(&e));
            return ExitCode::from(EXIT_USAGE as u8);
        }
    };
    match run(cli) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.code as u8)
        }
    }
}
