use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid config field `{field}`: {reason}")]
    Field { field: &'static str, reason: String },

    #[error("cannot parse config{}: {message}", file.as_ref().map(|p| format!(" {}", p.display())).unwrap_or_default())]
    Parse { file: Option<PathBuf>, message: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("writing CSV: {0}")]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Model(#[from] str_relay::Error),
}

impl CliError {
    pub fn field(field: &'static str, reason: impl Into<String>) -> Self {
        CliError::Field {
            field,
            reason: reason.into(),
        }
    }

    /// Configuration problems exit with 2, everything else with 1.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Field { .. } | CliError::Parse { .. } => 2,
            _ => 1,
        }
    }
}
