use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("oracle error: {0}")]
    Oracle(String),
    #[error("manifold is not reducible: {0}")]
    NotReducible(String),
    #[error("invalid family: {0}")]
    InvalidFamily(String),
    #[error("index out of range: {0}")]
    Index(String),
    #[error("family is not a symmetric system: {0}")]
    NotSymmetric(String),
    #[error("assignment is not allowable: {0}")]
    NotAllowable(String),
    #[error("words live on different manifolds")]
    ManifoldMismatch,
    #[error("invalid word: {0}")]
    InvalidWord(String),
    #[error("letter {position} ({letter}) leaves normal position: {detail}")]
    NotLaminarAfterSlide {
        position: usize,
        letter: String,
        detail: String,
    },
    #[error("no word reaches the target state ({0} states searched)")]
    Unreachable(usize),
    #[error("search exceeded {0} states")]
    SearchLimit(usize),
    #[error("type mismatch: {0}")]
    TypeMismatch(String),
    #[error("word is not discrepant: {0}")]
    NotDiscrepant(String),
}

impl Error {
    pub fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Parse { .. } => "ParseError",
            Error::Oracle(_) => "OracleError",
            Error::NotReducible(_) => "NotReducible",
            Error::InvalidFamily(_) => "InvalidFamily",
            Error::Index(_) => "IndexError",
            Error::NotSymmetric(_) => "NotSymmetric",
            Error::NotAllowable(_) => "NotAllowable",
            Error::ManifoldMismatch => "ManifoldMismatch",
            Error::InvalidWord(_) => "InvalidWord",
            Error::NotLaminarAfterSlide { .. } => "NotLaminarAfterSlide",
            Error::Unreachable(_) => "Unreachable",
            Error::SearchLimit(_) => "SearchLimit",
            Error::TypeMismatch(_) => "TypeMismatch",
            Error::NotDiscrepant(_) => "NotDiscrepant",
        }
    }

    pub fn is_parse(&self) -> bool {
        matches!(self, Error::Parse { .. })
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
