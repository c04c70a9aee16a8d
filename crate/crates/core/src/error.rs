use thiserror::Error;

/// Errors produced anywhere in the pipeline.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{line}:{col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },

    #[error("unbound data variable `{0}`")]
    UnboundDataVar(String),

    #[error("unbound logical variable `{0}`")]
    UnboundLogicVar(String),

    #[error("invalid domain: {0}")]
    Domain(String),

    #[error("action `{0}` is outside the declared domain")]
    OutsideDomain(String),

    #[error("formula is not guarded: `{0}` occurs outside a modality")]
    Unguarded(String),

    #[error("formula is not in the expected fragment: {0}")]
    Fragment(String),

    #[error("transducer is ill-formed: {0}")]
    IllFormed(String),

    #[error("no underlined form for the insertion pattern")]
    UnderlineInsertion,

    #[error("state bound of {0} exceeded")]
    BoundExceeded(usize),

    #[error("too many distinct guard conditions in one body ({0} > 12)")]
    TooManyConditions(usize),

    #[error("normalisation blew up: {0}")]
    Explosion(String),

    #[error("unknown name `{0}`")]
    UnknownName(String),

    #[error("duplicate name `{0}`")]
    DuplicateName(String),

    #[error("internal consistency check failed: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(line: usize, col: usize, msg: impl Into<String>) -> Self {
        Error::Parse { line, col, msg: msg.into() }
    }
}
