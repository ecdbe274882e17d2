use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    Line { line: usize, message: String },

    #[error("line {line}: no reasoning text or embedding to measure diversity with")]
    MissingDiversityInput { line: usize },

    #[error("{0}: no rollout records")]
    NoRecords(PathBuf),

    #[error("config file {path}: {message}")]
    ConfigFile { path: PathBuf, message: String },

    #[error(
        "unknown landscape `{0}` (expected easy, collapse-demo, deceptive-modes or a file path)"
    )]
    UnknownLandscape(String),

    #[error("embeddings are missing and no endpoint was given (set --embed-endpoint or MUPO_EMBED_ENDPOINT)")]
    NoEndpoint,

    #[error("count mismatch: sent {sent} texts, received {received} embeddings")]
    CountMismatch { sent: usize, received: usize },

    #[error("non-finite embedding at index {index}")]
    NonFiniteEmbedding { index: usize },

    #[error("embedding service returned HTTP {status}")]
    HttpStatus { status: u16 },

    #[error("embedding service unreachable: {0}")]
    Transport(String),

    #[error("malformed embedding response: {0}")]
    BadResponse(String),

    #[error(transparent)]
    Core(#[from] mupo_core::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
