use std::path::PathBuf;

/// Errors raised by the genelab library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid genome dimensions: {0}")]
    InvalidDims(String),

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("shape mismatch: expected {expected}, got {actual}")]
    ShapeMismatch { expected: usize, actual: usize },

    #[error("zero-norm vector under cosine metric at position {position}")]
    ZeroNorm { position: usize },

    #[error("variant {victim} listed twice as a victim at position {position}")]
    DuplicateVictim { position: usize, victim: usize },

    #[error("non-finite gradient at parameter {index}")]
    NonFiniteGradient { index: usize },

    #[error("non-finite loss at step {step}: {what}")]
    NonFiniteLoss { step: usize, what: String },

    #[error("training diverged at step {step}: non-finite {what}")]
    Diverged {
        step: usize,
        what: String,
        report: Box<crate::training::TrainReport>,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("prior mismatch: model uses {actual} prior, operation needs {expected}")]
    PriorMismatch {
        expected: &'static str,
        actual: &'static str,
    },

    #[error("capacity {capacity} exceeds enumeration limit {limit}")]
    CapacityTooLarge { capacity: String, limit: u64 },

    #[error("unknown attribute id `{0}`")]
    UnknownAttribute(String),

    #[error("conditional row {position} has zero total weight")]
    ZeroRow { position: usize },

    #[error("pruning width {x} exceeds half the variant count {n_v}")]
    PruneTooWide { x: usize, n_v: usize },

    #[error("bad magic in {path}: expected {expected:?}")]
    BadMagic { path: PathBuf, expected: String },

    #[error("truncated file {path}: {detail}")]
    Truncated { path: PathBuf, detail: String },

    #[error("unsupported format version {found} (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },

    #[error("malformed header: {0}")]
    Header(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
