use std::path::PathBuf;

pub type Result<T, E = DmtError> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum DmtError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("{path}: line {line}: expected {expected} fields, found {found}")]
    MalformedRow {
        path: PathBuf,
        line: u64,
        expected: usize,
        found: usize,
    },
    #[error("{path}: class column `{column}` not in header")]
    MissingClassColumn { path: PathBuf, column: String },
    #[error("{path}: need at least 2 data rows, found {found}")]
    TooFewRows { path: PathBuf, found: usize },
    #[error("{path}: attribute `{attribute}`: {detail}")]
    SchemaMismatch {
        path: PathBuf,
        attribute: String,
        detail: String,
    },
    #[error("model file line {line}: {message}")]
    ModelFormat { line: usize, message: String },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("cannot render reports: {0}")]
    Render(String),
    #[error(transparent)]
    Core(#[from] dmt_core::Error),
}

impl DmtError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        DmtError::Io {
            path: path.into(),
            source,
        }
    }
}
