use std::fmt;

use thiserror::Error;

/// A failure reading a JSONL input, tagged with its 1-based line number.
#[derive(Debug, Error)]
#[error("line {line}: {kind}")]
pub struct JsonlError {
    pub line: usize,
    pub kind: JsonlErrorKind,
}

impl JsonlError {
    pub fn new(line: usize, kind: JsonlErrorKind) -> Self {
        JsonlError { line, kind }
    }
}

#[derive(Debug)]
pub enum JsonlErrorKind {
    Io(std::io::Error),
    Parse(String),
    Invalid(String),
}

impl fmt::Display for JsonlErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            JsonlErrorKind::Io(e) => write!(f, "read error: {e}"),
            JsonlErrorKind::Parse(e) => write!(f, "malformed record: {e}"),
            JsonlErrorKind::Invalid(e) => write!(f, "{e}"),
        }
    }
}
