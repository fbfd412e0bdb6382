use thiserror::Error;

/// Errors raised by the library.
///
/// The variants are grouped so the command-line front end can map them onto
/// exit codes: shape/argument problems, data problems and numeric failures.
#[derive(Debug, Error)]
pub enum Error {
    #[error("length {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("invalid layout: {0}")]
    Layout(String),

    #[error("index {index} out of range for {len} sets")]
    SetIndex { index: usize, len: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("{what} requires n <= {cap}, got {n}")]
    TooLarge { what: &'static str, n: usize, cap: usize },

    #[error("invalid Pauli label character {0:?}")]
    PauliChar(char),

    #[error("invalid probability distribution: {0}")]
    Distribution(String),

    #[error("KL divergence undefined: q({index}) = 0 while p({index}) > 0; use jsd for distributions with mismatched support")]
    Support { index: usize },

    #[error("overlapping variable groups: {0}")]
    Overlap(String),

    #[error("invalid noise model: {0}")]
    Model(String),

    #[error("invalid experiment record: {0}")]
    Record(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
