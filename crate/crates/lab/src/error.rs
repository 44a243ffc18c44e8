use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] dyadic_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: line {line}: {msg}")]
    Format {
        path: PathBuf,
        line: usize,
        msg: String,
    },
    #[error("experiment precondition: {0}")]
    Precondition(String),
}

impl LabError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        LabError::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code: configuration problems are 2, everything else 1.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Config(_) | LabError::Model(_) => 2,
            _ => 1,
        }
    }
}
