use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("catalog record {index}: missing required field `{field}`")]
    MissingField { index: usize, field: &'static str },

    #[error("catalog record {index}: {message}")]
    InvalidRecord { index: usize, message: String },

    #[error("malformed catalog document: {0}")]
    CatalogFormat(String),

    #[error("invalid session parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid agent spec `{spec}`: {message}")]
    AgentSpec { spec: String, message: String },

    #[error("agent configuration: {0}")]
    AgentConfig(String),

    #[error("malformed session log line {line}: {message}")]
    LogFormat { line: usize, message: String },

    #[error("malformed summary file {path}: {message}")]
    SummaryFormat { path: PathBuf, message: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
