use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("declaration error: {0}")]
    Declaration(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("malformed condition: {0}")]
    MalformedCondition(String),

    #[error("enumeration limit exceeded: {count} evaluation maps requested, bound is {bound}")]
    EnumerationLimit { count: u128, bound: usize },

    #[error("exploration limit exceeded after {states} states and {transitions} transitions (bound {bound})")]
    ExplorationLimit {
        states: usize,
        transitions: usize,
        bound: usize,
    },

    #[error("term is not linear: {0}")]
    Shape(String),

    #[error("unguarded recursion: {0}")]
    Guardedness(String),

    #[error("unknown recursion variable `{0}`")]
    UnknownVariable(String),

    #[error("term is not closed: {0}")]
    NotClosed(String),

    #[error("open data term `{0}` has no evaluation map")]
    OpenData(String),

    #[error("{line}:{col}: {message}")]
    Parse {
        line: usize,
        col: usize,
        message: String,
    },

    #[error("outside the supported fragment: {0}")]
    Unsupported(String),

    #[error("CFAR is not applicable: {0}")]
    CfarInapplicable(String),

    #[error("certificate replay failed at step {step}: {reason}")]
    Replay { step: usize, reason: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
