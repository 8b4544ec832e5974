//! Command-line front end: scenario generation and validation, experiment
//! runs written as CSV, and text summaries of result directories.

pub mod args;
pub mod experiment;
pub mod output;
pub mod summarize;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::Parser;
use thiserror::Error;

use hsbnet_core::scenario::{generate_scenario, load_scenario, save_scenario, scenario_to_json};

pub use args::{Cli, Command, GenerateArgs, RunArgs};
pub use experiment::{run_experiment, Experiment, ExperimentResult, ExperimentSpec, Scale};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] hsbnet_core::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use hsbnet_core::Error as E;
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Core(E::Validation { .. } | E::Parse { .. } | E::Config(_)) => EXIT_VALIDATION,
            CliError::Core(_) | CliError::Io { .. } | CliError::Csv { .. } | CliError::Runtime(_) => EXIT_RUNTIME,
        }
    }

    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.to_path_buf(), source }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

/// Parses `argv` (program name first), runs the command and returns the
/// process exit code. Messages go to stdout, errors to stderr.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
        }
    };
    let stdout = std::io::stdout();
    match execute(cli, &mut stdout.lock()) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: Cli, out: &mut impl Write) -> Result<()> {
    match cli.command {
        Command::Generate(args) => generate(&args, out),
        Command::Run(args) => {
            let spec = ExperimentSpec::from_args(&args)?;
            let result = match args.threads {
                Some(n) => rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build()
                    .map_err(|e| CliError::Runtime(e.to_string()))?
                    .install(|| run_experiment(&spec)),
                None => run_experiment(&spec),
            }?;
            for path in output::write_result(&spec, &result)? {
                writeln!(out, "wrote {}", path.display()).map_err(|e| CliError::io(Path::new("<stdout>"), e))?;
            }
            Ok(())
        }
        Command::Summarize { dir } => {
            let text = summarize::summarize(&dir)?;
            write!(out, "{text}").map_err(|e| CliError::io(Path::new("<stdout>"), e))
        }
        Command::ValidateScenario { path } => {
            let s = load_scenario(&path)?;
            writeln!(
                out,
                "{}: ok ({} MUs, {} BSs)",
                path.display(),
                s.num_users(),
                s.num_stations()
            )
            .map_err(|e| CliError::io(Path::new("<stdout>"), e))
        }
    }
}

fn generate(args: &GenerateArgs, out: &mut impl Write) -> Result<()> {
    let scenario = generate_scenario(&args.generation_config())?;
    match &args.out {
        Some(path) => {
            save_scenario(&scenario, path).map_err(|e| match e {
                hsbnet_core::Error::Io(io) => CliError::io(path, io),
                other => other.into(),
            })?;
            writeln!(out, "wrote {}", path.display()).map_err(|e| CliError::io(Path::new("<stdout>"), e))
        }
        None => writeln!(out, "{}", scenario_to_json(&scenario)).map_err(|e| CliError::io(Path::new("<stdout>"), e)),
    }
}
