use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid correlator: {0}")]
    InvalidCorrelator(String),

    #[error("invalid space: M_0,{n} needs at least 3 marks")]
    InvalidSpace { n: usize },

    #[error("modified psi classes are undefined in degree 0")]
    ModifiedPsiInDegreeZero,

    #[error("no insertion {0} present")]
    MissingInsertion(&'static str),

    #[error("invalid reduction: {0}")]
    InvalidReduction(String),

    #[error("invalid condition: {0}")]
    InvalidCondition(String),

    #[error("not a finite count: conditions have codimension {provided}, the space has dimension {required}")]
    NotFiniteCount { required: i64, provided: i64 },

    #[error("internal consistency failure: {0}")]
    Inconsistent(String),

    #[error("syntax error at offset {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("cache file line {line}: {message}")]
    CacheFormat { line: usize, message: String },

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
