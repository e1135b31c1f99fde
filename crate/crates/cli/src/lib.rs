//! The `trendcast` command line.
//!
//! [`run`] parses arguments, executes one subcommand and returns the process
//! exit code: 0 on success, 1 for invalid input, 2 for I/O failures. Errors
//! are printed to standard error as one JSON object.

pub mod args;
mod commands;
pub mod fetch;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::Parser;
use thiserror::Error;
use trendcast::evaluation::EvalError;
use trendcast::{CorpusError, FeatureError, ModelError};
use trendcast_service::{RegistryError, ServiceError};

use args::Cli;
use fetch::FetchError;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_IO: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Invalid(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("writing {}: {source}", path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Registry(#[from] RegistryError),
    #[error(transparent)]
    Service(#[from] ServiceError),
    #[error(transparent)]
    Fetch(#[from] FetchError),
}

fn model_is_io(e: &ModelError) -> bool {
    matches!(e, ModelError::Io(_))
}

fn corpus_is_io(e: &CorpusError) -> bool {
    matches!(e, CorpusError::Io { .. })
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        let io = match self {
            CliError::Invalid(_) | CliError::Feature(_) => false,
            CliError::Io { .. } | CliError::Csv { .. } | CliError::Service(_) => true,
            CliError::Corpus(e) => corpus_is_io(e),
            CliError::Model(e) => model_is_io(e),
            CliError::Eval(e) => matches!(e, EvalError::Model(m) if model_is_io(m)),
            CliError::Registry(e) => match e {
                RegistryError::Io { .. } => true,
                RegistryError::Corpus(c) => corpus_is_io(c),
                RegistryError::Model { source, .. } => model_is_io(source),
                _ => false,
            },
            CliError::Fetch(e) => !matches!(e, FetchError::Parse { .. }),
        };
        if io {
            EXIT_IO
        } else {
            EXIT_INVALID
        }
    }

    fn code(&self) -> &'static str {
        if self.exit_code() == EXIT_IO {
            "io"
        } else {
            "invalid_input"
        }
    }
}

/// Runs the command line with `argv` (program name first).
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    match commands::execute(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let report = serde_json::json!({ "error": e.code(), "message": e.to_string() });
            eprintln!("{report}");
            e.exit_code()
        }
    }
}
