use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("malformed row at line {line}: {reason}")]
    MalformedRow { line: u64, reason: String },

    #[error("unparseable timestamp {value:?} at line {line}")]
    Timestamp { value: String, line: u64 },

    #[error("missing column {0:?}")]
    MissingColumn(String),

    #[error("invalid price at line {line}: {reason}")]
    InvalidPrice { line: u64, reason: String },

    #[error("duplicate date {0}")]
    DuplicateDate(String),

    #[error("keyword file: {0}")]
    Keywords(String),

    #[error("lexicon: {0}")]
    Lexicon(String),

    #[error("no scored tweets")]
    NoScoredTweets,

    #[error("score {0} outside [-1, 1]")]
    ScoreOutOfRange(f64),

    #[error("series is already centered")]
    AlreadyCentered,

    #[error("insufficient nodes: need at least {needed} observed rows, got {got}")]
    InsufficientNodes { needed: usize, got: usize },

    #[error("price series has a gap after {0}; fill the calendar first")]
    NotContiguous(String),

    #[error("wavelet: {0}")]
    Wavelet(String),

    #[error("shape mismatch in {operand}: expected {expected}, got {got}")]
    ShapeMismatch {
        operand: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("series too short: {0}")]
    SeriesTooShort(String),

    #[error("sentiment missing for dates: {}", .0.join(", "))]
    MisalignedSentiment(Vec<String>),

    #[error("degenerate series")]
    DegenerateSeries,

    #[error("empty series")]
    EmptySeries,

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("zero truth value at {0}")]
    ZeroTruth(String),

    #[error("empty test range")]
    EmptyTestRange,

    #[error("test range {0}")]
    TestRange(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("model file: {0}")]
    Model(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Model(e.to_string())
    }
}

pub(crate) fn csv_error(err: csv::Error) -> Error {
    let line = err.position().map(|p| p.line()).unwrap_or(0);
    match err.into_kind() {
        csv::ErrorKind::Io(e) => Error::Io(e),
        csv::ErrorKind::Utf8 { err, .. } => Error::MalformedRow {
            line,
            reason: format!("invalid UTF-8: {err}"),
        },
        csv::ErrorKind::UnequalLengths {
            expected_len, len, ..
        } => Error::MalformedRow {
            line,
            reason: format!("expected {expected_len} fields, found {len}"),
        },
        other => Error::MalformedRow {
            line,
            reason: format!("{other:?}"),
        },
    }
}
