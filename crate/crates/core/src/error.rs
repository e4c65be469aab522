use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Crate-wide error type. Variants map onto the pipeline stages: file
/// ingestion, tree parsing, pattern compilation, resource loading, scoring
/// and statistics.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Malformed {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("document {doc_id}, sentence {index}: {message}")]
    Sentence {
        doc_id: String,
        index: usize,
        message: String,
    },

    #[error("duplicate document id {0:?}")]
    DuplicateDocument(String),

    #[error("tree syntax error at offset {offset}: {message}")]
    TreeSyntax { offset: usize, message: String },

    #[error("pattern syntax error: {0}")]
    PatternSyntax(String),

    #[error("missing resource: {0}")]
    MissingResource(String),

    #[error("registry: {0}")]
    Registry(String),

    #[error("not a word: {0:?}")]
    UndefinedWord(String),

    #[error("score table: {0}")]
    Table(String),

    #[error("empty reference: word error rate is undefined")]
    EmptyReference,

    #[error("constant input: correlation is undefined")]
    ConstantInput,

    #[error("need at least {need} paired observations, found {found}")]
    TooFewPairs { need: usize, found: usize },

    #[error("tables do not align: {0}")]
    TableMismatch(String),

    #[error("selection removed every column")]
    DegenerateSelection,

    #[error("ordinal labels must cover at least two classes")]
    SingleClass,

    #[error("ordinal class {0} has no observations")]
    MissingClass(usize),

    #[error("constant predictor: cannot standardize")]
    ConstantPredictor,
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for operating-system level I/O failures, as opposed to
    /// validation or domain errors. Callers use this to pick exit codes.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. })
    }
}
