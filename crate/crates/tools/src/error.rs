use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("input: {0}")]
    Input(String),
    #[error("numeric: {0}")]
    Numeric(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Input(_) => 3,
            CliError::Numeric(_) => 4,
            CliError::Io { .. } => 1,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

/// Library errors raised while turning configuration into results. Non-finite
/// and degenerate numerics are numeric failures; everything else traces back
/// to a configured value.
impl From<sinuous_core::Error> for CliError {
    fn from(e: sinuous_core::Error) -> Self {
        use sinuous_core::Error as E;
        match e {
            E::NonFinite(_) | E::Degenerate(_) => CliError::Numeric(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

/// Same mapping for errors caused by input data rather than configuration.
pub fn input_err(e: sinuous_core::Error) -> CliError {
    match CliError::from(e) {
        CliError::Config(msg) => CliError::Input(msg),
        other => other,
    }
}
