use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("degenerate triangle (zero area)")]
    DegenerateTriangle,
    #[error("non-finite coordinate")]
    NonFinite,
    #[error("quadratic form is singular (det = 0)")]
    SingularForm,
    #[error("point ({x}, {y}) lies outside the source domain")]
    OutsideDomain { x: f64, y: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("operation not supported for this source: {0}")]
    Unsupported(&'static str),
    #[error("malformed PGM: {0}")]
    Pgm(String),
    #[error("malformed bit stream at bit {position}: {reason}")]
    BitStream { position: usize, reason: String },
    #[error("coefficient refers to node {0} which is not an internal node of the tree")]
    UnknownNode(u32),
    #[error("parse error on line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
