use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("letter {letter} at position {position} is outside an alphabet of size {size}")]
    LetterOutOfRange {
        letter: u8,
        position: usize,
        size: u8,
    },
    #[error("alphabet size must be between 1 and 10, got {0}")]
    BadAlphabet(usize),
    #[error("cannot parse {what}: {detail}")]
    Parse { what: &'static str, detail: String },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("pattern {0} is not doubled with every variable exactly twice")]
    NotExactlyDoubled(String),
    #[error("word of length {len} exceeds the cut-number oracle cap of {cap}")]
    WordTooLong { len: usize, cap: usize },
    #[error("search budget of {0} nodes exhausted")]
    BudgetExceeded(u64),
    #[error("morphism image is invalid: {0}")]
    BadMorphism(String),
    #[error("letter {0} is not a seed: its image does not start with it")]
    NotSelfExtending(u8),
}

impl Error {
    pub(crate) fn parse(what: &'static str, detail: impl Into<String>) -> Self {
        Error::Parse {
            what,
            detail: detail.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
