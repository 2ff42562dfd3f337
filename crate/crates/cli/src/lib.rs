//! File formats, reports and the command-line pipelines built on
//! `dyadic-weights-core`.

use std::path::PathBuf;

pub mod format;
pub mod run;

pub use run::{run, Cli, Command, Options, Outcome, OutputFormat};

/// Overrides the directory used for relative output paths.
pub const OUTPUT_DIR_VAR: &str = "DYADIC_WEIGHTS_OUT_DIR";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{}: {source}", path.display())]
    Parse {
        path: PathBuf,
        source: serde_json::Error,
    },

    #[error("{}: field `{field}`: {message}", path.display())]
    Field {
        path: PathBuf,
        field: String,
        message: String,
    },

    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] dyadic_weights_core::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}
