use thiserror::Error;

/// Everything that can go wrong in this crate.
///
/// Each variant maps to a stable machine-readable code (see [`Error::code`]),
/// which the CLI surfaces alongside the message.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("rank must be between 2 and 26, got {0}")]
    InvalidRank(u32),

    #[error("invalid word {word:?}: {reason}")]
    InvalidWord { word: String, reason: String },

    #[error("boundary prefix too short: need {needed} letters, have {available}")]
    PrefixTooShort { needed: usize, available: usize },

    #[error("cylinder {cylinder} is too short for {word}; refine it into its children")]
    RefineCylinder { cylinder: String, word: String },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("enumeration budget of {limit} exceeded")]
    BudgetExceeded { limit: u64 },

    #[error("arithmetic overflow in {0}")]
    Overflow(&'static str),

    #[error("oracle mismatch: {0}")]
    OracleMismatch(String),
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidRank(_) | Error::InvalidWord { .. } | Error::InvalidParams(_) => {
                "validation"
            }
            Error::PrefixTooShort { .. } => "prefix-too-short",
            Error::RefineCylinder { .. } => "refine-cylinder",
            Error::Precondition(_) => "precondition",
            Error::BudgetExceeded { .. } => "budget-exceeded",
            Error::Overflow(_) => "overflow",
            Error::OracleMismatch(_) => "oracle-mismatch",
        }
    }

    pub(crate) fn params(msg: impl Into<String>) -> Self {
        Error::InvalidParams(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
