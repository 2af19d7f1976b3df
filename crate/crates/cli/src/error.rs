use std::path::PathBuf;

pub type Result<T, E = FileError> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum FileError {
    #[error("{}: no such file", .0.display())]
    NotFound(PathBuf),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    /// The document is syntactically or semantically malformed.
    #[error("malformed input: {0}")]
    Malformed(String),
    #[error(transparent)]
    Core(#[from] metamodel_core::Error),
}

impl FileError {
    pub fn malformed(msg: impl Into<String>) -> Self {
        FileError::Malformed(msg.into())
    }
}

impl From<serde_json::Error> for FileError {
    fn from(e: serde_json::Error) -> Self {
        FileError::Malformed(e.to_string())
    }
}
