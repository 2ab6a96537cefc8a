use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A generation or run configuration is unusable.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// An index or argument is outside the instance it refers to.
    #[error("{what} index {index} out of range (len {len})")]
    Domain {
        what: &'static str,
        index: usize,
        len: usize,
    },

    /// A document could not be read; `field` names the offending entry.
    #[error("malformed document, field `{field}`: {message}")]
    Parse { field: String, message: String },

    /// A schedule or model violates its structural invariants.
    #[error("validation failed: {0}")]
    Validation(String),

    /// Exhaustive enumeration refused because the search space is too big.
    #[error("instance too large for exhaustive search: {candidates} candidates (limit {limit})")]
    TooLarge { candidates: u128, limit: u128 },

    #[error("solver error: {0}")]
    Solver(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn parse(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn domain(what: &'static str, index: usize, len: usize) -> Self {
        Error::Domain { what, index, len }
    }
}

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        // serde reports missing fields as "missing field `name`"; surface the name.
        let text = err.to_string();
        let field = text
            .split('`')
            .nth(1)
            .map(str::to_owned)
            .unwrap_or_else(|| "<document>".to_owned());
        Error::Parse {
            field,
            message: text,
        }
    }
}
