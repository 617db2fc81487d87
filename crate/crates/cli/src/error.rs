use std::path::PathBuf;

use kramers_core::{AssumptionReport, ErrorClass};

/// Failure of a CLI run, mapped onto the process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("cannot {action} `{}`: {source}", path.display())]
    Io {
        action: &'static str,
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("potential violates the modeling hypotheses: {}", .0.diagnostics.join("; "))]
    Hypothesis(AssumptionReport),

    #[error(transparent)]
    Core(#[from] kramers_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => 1,
            CliError::Hypothesis(_) => 2,
            CliError::Core(e) => match e.class() {
                ErrorClass::Input => 1,
                ErrorClass::Hypothesis => 2,
                ErrorClass::Numerical => 3,
            },
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
