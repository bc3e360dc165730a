use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{origin}:{line}: {msg}")]
    Config { origin: String, line: usize, msg: String },
    #[error("{path}: line {line}, column '{column}': {msg}")]
    Schema {
        path: String,
        line: usize,
        column: String,
        msg: String,
    },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("simulation failed: {0}")]
    Simulation(sae_core::SaeError),
    #[error("fit failed: {0}")]
    Fit(sae_core::SaeError),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } | CliError::Schema { .. } | CliError::Usage(_) => 2,
            CliError::Simulation(_) => 3,
            CliError::Fit(_) => 4,
            CliError::Io { .. } => 1,
        }
    }

    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}
