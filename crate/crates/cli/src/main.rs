//! `symboleo` — check, score and generate Symboleo specifications.

mod commands;
mod output;

use clap::{Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Text,
    Csv,
    JsonLines,
}

#[derive(Debug, Parser)]
#[command(name = "symboleo", version, about = "Parse, lint, score and generate Symboleo specifications")]
pub struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Print nothing on stdout; only the exit status reports the outcome.
    #[arg(long, short, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse a specification and report syntax errors.
    Parse {
        path: PathBuf,
        /// The file holds only some sections.
        #[arg(long)]
        fragment: bool,
    },
    /// Parse and check a specification.
    Lint {
        path: PathBuf,
        #[arg(long)]
        fragment: bool,
    },
    /// Score manual annotations, optionally merged with lint findings.
    Score {
        /// Annotation file (`caseId | section | taxonomyId | count | note`).
        annotations: PathBuf,
        /// Only this case.
        #[arg(long)]
        case: Option<u32>,
        /// Merge the lint findings of this specification into the scored case.
        #[arg(long, requires = "case")]
        lint: Option<PathBuf>,
        #[arg(long, requires = "lint")]
        fragment: bool,
        /// Compare the scored case with a row of this report (CSV or JSON lines).
        #[arg(long, requires = "case")]
        compare: Option<PathBuf>,
        /// Row of the comparison report to use; defaults to the scored case id.
        #[arg(long, requires = "compare")]
        against: Option<u32>,
        /// Largest total difference still considered equivalent.
        #[arg(long, default_value_t = symboleo_core::scorer::DEFAULT_MARGIN)]
        margin: u32,
    },
    /// Write the prompt of every matrix case to `<outdir>/case-NN.txt`.
    Prompts {
        outdir: PathBuf,
        #[arg(long, default_value = "assets")]
        assets: PathBuf,
        /// Put the emotional directive right after the base statement.
        #[arg(long)]
        emotional_after_base: bool,
        /// Use this grammar text instead of the bundled one.
        #[arg(long)]
        grammar: Option<PathBuf>,
    },
    /// Send matrix cases to a model endpoint (or replay stored responses).
    Run(commands::RunArgs),
    /// Tabulate scores and error frequencies.
    Report {
        /// Annotation files, CSV or JSON-lines score tables, or run directories.
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long, value_enum, default_value_t = commands::View::Both)]
        view: commands::View,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
