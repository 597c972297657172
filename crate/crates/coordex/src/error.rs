//! Error type shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown axis `{0}`")]
    UnknownAxis(String),

    #[error("axis `{0}` appears more than once")]
    DuplicateAxis(String),

    #[error("axis groups overlap on `{0}`")]
    OverlappingGroups(String),

    #[error("empty axis selection")]
    EmptySelection,

    #[error("expected {expected} entries, got {got}")]
    ShapeMismatch { expected: usize, got: usize },

    #[error("sequence lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),

    #[error("probabilities sum to {0:.12}, expected 1 within 1e-9")]
    NotNormalized(f64),

    #[error("negative probability {value:e} at flat index {index}")]
    NegativeEntry { index: usize, value: f64 },

    #[error("symbol {value} out of range for axis `{axis}` of size {size}")]
    SymbolOutOfRange { axis: String, value: usize, size: usize },

    #[error("structural residual `{condition}` is {residual:e}, above tolerance {tolerance:e}")]
    StructureViolation {
        condition: String,
        residual: f64,
        tolerance: f64,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("no auxiliary factorization reproduces the target within tolerance (best deviation {best_tv:e})")]
    InfeasibleTarget { best_tv: f64 },

    #[error("grid has {candidates} candidates, above the cap {cap}")]
    GridTooLarge { candidates: u128, cap: u64 },

    #[error("rate window is empty: lower bound {lower:.6} meets upper bound {upper:.6}")]
    InfeasibleRate { lower: f64, upper: f64 },

    #[error("codebook needs {requested} codewords, above the cap {cap}")]
    CodebookTooLarge { requested: u64, cap: u64 },
}
