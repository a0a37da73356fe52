//! `parwb`: experiment driver emitting CSV tables.

mod apps;
mod commands;
mod config;
mod netsim;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use parwb::netsim::SimError;

#[derive(Debug, Parser)]
#[command(name = "parwb", version, about = "Parallel computing workbench", args_override_self = true)]
struct Cli {
    /// Seed of every random instance.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// CSV destination; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// `key=value` file of default flags; explicit flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    Analyze(commands::AnalyzeArgs),
    Pram(commands::PramArgs),
    Dag(commands::DagArgs),
    Kernels(commands::KernelsArgs),
    Netsim(netsim::NetsimArgs),
    Coll(commands::CollArgs),
    Apps(apps::AppsArgs),
}

#[derive(Debug)]
pub enum CliError {
    Args(String),
    Domain(String),
    Deadlock(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Args(_) => 1,
            CliError::Domain(_) => 2,
            CliError::Deadlock(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Args(m) | CliError::Domain(m) | CliError::Deadlock(m) => m,
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Deadlock { .. } => CliError::Deadlock(e.to_string()),
            other => CliError::Domain(other.to_string()),
        }
    }
}

/// A CSV table: one header line, then rows.
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(header: &str) -> Self {
        Csv { text: format!("{header}\n") }
    }

    pub fn row(&mut self, fields: &[String]) {
        self.text.push_str(&fields.join(","));
        self.text.push('\n');
    }
}

/// Output of a subcommand. A failure may still carry a table to write.
pub struct Outcome {
    pub csv: Csv,
    pub error: Option<CliError>,
}

impl From<Csv> for Outcome {
    fn from(csv: Csv) -> Self {
        Outcome { csv, error: None }
    }
}

fn write_out(out: Option<&PathBuf>, csv: &Csv) -> Result<(), CliError> {
    let res = match out {
        Some(path) => std::fs::write(path, &csv.text),
        None => std::io::stdout().lock().write_all(csv.text.as_bytes()),
    };
    res.map_err(|e| CliError::Domain(format!("cannot write output: {e}")))
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let seed = cli.seed;
    let outcome: Outcome = match &cli.command {
        Command::Analyze(a) => commands::analyze(a)?.into(),
        Command::Pram(a) => commands::pram(a, seed)?.into(),
        Command::Dag(a) => commands::dag(a)?.into(),
        Command::Kernels(a) => commands::kernels(a, seed)?.into(),
        Command::Netsim(a) => netsim::run(a)?,
        Command::Coll(a) => commands::coll(a)?.into(),
        Command::Apps(a) => apps::run(a, seed)?.into(),
    };
    write_out(cli.out.as_ref(), &outcome.csv)?;
    outcome.error.map_or(Ok(()), Err)
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let argv = match config::expand(argv) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {}", e.message());
            return ExitCode::from(e.code());
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
