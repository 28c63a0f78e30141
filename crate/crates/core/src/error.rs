use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}:{line}: malformed record: {message}", path.display())]
    MalformedRecord {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("empty corpus")]
    EmptyCorpus,

    #[error("duplicate document id `{0}`")]
    DuplicateId(String),

    #[error("record `{id}` has label `{label}` which is not a declared class")]
    UnknownLabel { id: String, label: String },

    #[error("document `{0}` is unlabeled")]
    Unlabeled(String),

    #[error("class `{class}` has {count} labeled documents, need at least {required}")]
    TooFewMembers {
        class: String,
        count: usize,
        required: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("bad embedding file: {0}")]
    Format(String),

    #[error("checksum mismatch: stored {stored:#010x}, computed {computed:#010x}")]
    Checksum { stored: u32, computed: u32 },

    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    #[error("empty matrix")]
    EmptyMatrix,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("id `{0}` not present in embedding matrix")]
    MissingId(String),

    #[error("training set contains a single class")]
    SingleClass,

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("empty input")]
    EmptyInput,

    #[error("prompt error: {0}")]
    Prompt(String),

    #[error("cassette error: {0}")]
    Cassette(String),

    #[error(
        "LLM backend failed on document `{id}` after {completed} completed outcomes: {message}"
    )]
    Backend {
        id: String,
        completed: usize,
        message: String,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("fold {fold}: {source}")]
    Fold {
        fold: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn in_fold(self, fold: usize) -> Self {
        Error::Fold {
            fold,
            source: Box::new(self),
        }
    }

    /// Whether the failure stems from bad input files or configuration, as
    /// opposed to something that went wrong while evaluating.
    pub fn is_input_error(&self) -> bool {
        match self {
            Error::Fold { source, .. } => source.is_input_error(),
            Error::Backend { .. } | Error::SingleClass | Error::EmptyInput => false,
            Error::LengthMismatch { .. } | Error::DimensionMismatch { .. } => false,
            _ => true,
        }
    }

    /// Process exit code: 2 for input/configuration failures, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.is_input_error() {
            2
        } else {
            1
        }
    }
}
