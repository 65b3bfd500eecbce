use std::path::PathBuf;

use thiserror::Error;

use crate::session::SessionKey;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A record in an input file failed validation.
    #[error("record {record}: invalid `{field}`: {message}")]
    Malformed {
        record: usize,
        field: String,
        message: String,
    },

    #[error("session {session}: events out of time order in `{field}` at index {index}")]
    Unordered {
        session: String,
        field: &'static str,
        index: usize,
    },

    #[error("line {line}: {message}")]
    Lexicon { line: usize, message: String },

    #[error("corpus: {0}")]
    Corpus(String),

    #[error("mapping: {0}")]
    Mapping(String),

    #[error("session {0}: content fits the viewport, engagement rule cannot be applied")]
    DegenerateLayout(SessionKey),

    #[error("insufficient events{}: {message}", session.as_ref().map(|k| format!(" in session {k}")).unwrap_or_default())]
    InsufficientEvents {
        session: Option<SessionKey>,
        message: String,
    },

    #[error("malformed event stream: non-increasing time at pair {index}")]
    MalformedStream { index: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("text too short: {0}")]
    TooShort(String),

    #[error("no lexicon coverage for any token")]
    NoCoverage,

    #[error("feature selection `{selection}` requires {missing}")]
    MissingFeatures { selection: String, missing: &'static str },

    #[error("training data contains a single class")]
    SingleClass,

    #[error("all feature columns have zero variance")]
    AllZeroVariance,

    #[error("class `{class}` has {count} members, fewer than k = {k}")]
    ClassTooSmall { class: String, count: usize, k: usize },

    #[error("correlation undefined: {0}")]
    UndefinedCorrelation(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),
}

impl Error {
    /// Stable snake_case name of the variant, for machine-readable output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::Malformed { .. } => "malformed",
            Error::Unordered { .. } => "unordered",
            Error::Lexicon { .. } => "lexicon",
            Error::Corpus(_) => "corpus",
            Error::Mapping(_) => "mapping",
            Error::DegenerateLayout(_) => "degenerate_layout",
            Error::InsufficientEvents { .. } => "insufficient_events",
            Error::MalformedStream { .. } => "malformed_stream",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::TooShort(_) => "too_short",
            Error::NoCoverage => "no_coverage",
            Error::MissingFeatures { .. } => "missing_features",
            Error::SingleClass => "single_class",
            Error::AllZeroVariance => "all_zero_variance",
            Error::ClassTooSmall { .. } => "class_too_small",
            Error::UndefinedCorrelation(_) => "undefined_correlation",
            Error::InsufficientData(_) => "insufficient_data",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn malformed(record: usize, field: &str, message: impl Into<String>) -> Self {
        Error::Malformed {
            record,
            field: field.to_string(),
            message: message.into(),
        }
    }
}
