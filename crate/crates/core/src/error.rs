use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid config: {0}")]
    Config(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("byte count overflows u64")]
    Overflow,

    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error(transparent)]
    Model(#[from] ModelFormatError),

    #[error("invalid search space: {0}")]
    SearchSpace(String),

    #[error("invalid symbol prefix {0:?}: must match [A-Za-z_][A-Za-z0-9_]*")]
    SymbolPrefix(String),

    #[error("class {class} out of range for {n_classes} classes")]
    ClassOutOfRange { class: usize, n_classes: usize },

    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Dataset text parse failure, always tied to a 1-based line number.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("empty file")]
    Empty,
    #[error("non-binary feature value {0:?}")]
    NonBinary(String),
    #[error("ragged row: expected {expected} features, found {found}")]
    Ragged { expected: usize, found: usize },
    #[error("invalid label {0:?}")]
    BadLabel(String),
    #[error("missing `#literals=N` header")]
    MissingHeader,
    #[error("invalid index {0:?}")]
    BadIndex(String),
    #[error("indices not strictly ascending at {0}")]
    Unsorted(u32),
    #[error("index {index} out of range for {n_literals} literals")]
    IndexOutOfRange { index: u32, n_literals: usize },
    #[error("missing tab between label and indices")]
    MissingTab,
}

/// Binary model file failures. Offsets are byte positions into the file.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelFormatError {
    #[error("bad magic {0:?}, expected \"GTM1\"")]
    BadMagic([u8; 4]),
    #[error("unsupported format version {found} (expected {expected})")]
    Version { found: u16, expected: u16 },
    #[error("truncated model file at byte {offset} (needed {needed} more bytes)")]
    Truncated { offset: usize, needed: usize },
    #[error("unknown model kind tag {0}")]
    UnknownKind(u8),
    #[error("corrupt model at byte {offset}: {reason}")]
    Corrupt { offset: usize, reason: String },
}
