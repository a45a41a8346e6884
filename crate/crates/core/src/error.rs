use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension error: {op} got shapes {lhs:?} and {rhs:?}")]
    Dimension {
        op: &'static str,
        lhs: Vec<usize>,
        rhs: Vec<usize>,
    },

    #[error("{0}")]
    Invalid(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("alignment error: parse has {parse_tokens} tokens, document has {doc_tokens}")]
    Alignment {
        parse_tokens: usize,
        doc_tokens: usize,
    },

    #[error("unknown entity id `{0}` referenced by a relation")]
    UnknownEntity(String),

    #[error("unknown mention kind `{kind}`; expected one of: {expected}")]
    UnknownKind { kind: String, expected: String },

    #[error("non-finite loss in batch {batch} of epoch {epoch}")]
    NonFiniteLoss { epoch: usize, batch: usize },

    #[error("parameter `{0}` has no gradient")]
    MissingGrad(String),

    #[error("function is not deterministic: two evaluations at the same point differ")]
    NonDeterministic,

    #[error("no parameter matches freeze prefix `{0}`")]
    UnmatchedPrefix(String),

    #[error("bad checkpoint magic")]
    BadMagic,

    #[error("checkpoint format version {found} is not supported (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },

    #[error("config digest mismatch: checkpoint was written for a different model configuration")]
    DigestMismatch,

    #[error("unexpected end of checkpoint")]
    Truncated,

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub(crate) fn dim(op: &'static str, lhs: &[usize], rhs: &[usize]) -> Self {
        Error::Dimension {
            op,
            lhs: lhs.to_vec(),
            rhs: rhs.to_vec(),
        }
    }

    pub(crate) fn parse(path: impl AsRef<std::path::Path>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.as_ref().display().to_string(),
            line,
            message: message.into(),
        }
    }
}

pub(crate) fn read_to_string(path: &std::path::Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub(crate) fn io_err(path: &std::path::Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}
