use std::path::PathBuf;

pub type Result<T, E = LabError> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    /// Invalid configuration; the message names the offending field.
    #[error("config error: {0}")]
    Config(String),
    /// A malformed input file.
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    /// Stored data disagrees with its recomputation.
    #[error("integrity error: {0}")]
    Integrity(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] ued_core::Error),
}

impl LabError {
    pub fn parse(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        LabError::Parse {
            path: path.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        LabError::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status: 2 for configuration and input errors, 3 for
    /// integrity failures, 4 for numerical failures, 1 for IO trouble.
    pub fn exit_code(&self) -> u8 {
        match self {
            LabError::Config(_) | LabError::Parse { .. } => 2,
            LabError::Integrity(_) => 3,
            LabError::Io { .. } => 1,
            LabError::Core(e) => match e {
                ued_core::Error::Numerical { .. } => 4,
                _ => 2,
            },
        }
    }
}

pub(crate) fn read_to_string(path: &std::path::Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| LabError::io(path, e))
}

pub(crate) fn write(path: &std::path::Path, bytes: impl AsRef<[u8]>) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| LabError::io(path, e))
}
