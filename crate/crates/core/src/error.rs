use thiserror::Error;

/// Errors raised by dataset handling, training and network construction.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dataset needs at least {needed} patterns, got {found}")]
    EmptyDataset { needed: usize, found: usize },

    #[error("feature {0} has zero variance")]
    ConstantFeature(usize),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("weights cannot be mapped back to user units (zero denominator)")]
    DegenerateWeights,

    #[error("weight vector has zero norm")]
    ZeroWeights,

    #[error("temperature must be positive, got {0}")]
    NonPositiveTemperature(f64),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("target must be -1 or +1, got {0}")]
    InvalidTarget(i64),

    #[error("no wrongly learned pattern under the given weights")]
    NoWronglyLearnedPattern,

    #[error("closest wrongly learned pattern lies on the hyperplane")]
    PatternOnHyperplane,

    #[error("appendix construction failed: {0}")]
    ConstructionFailed(String),

    #[error("growth stalled with {errors} training errors after {hidden} hidden units")]
    FallbackExhausted { errors: usize, hidden: usize },

    #[error("identical inputs with conflicting targets (patterns {first} and {second})")]
    ConflictingDuplicates { first: usize, second: usize },

    #[error("class {0} has no patterns in the training set")]
    DegenerateClass(i64),

    #[error("parameter N = {0} out of range")]
    NOutOfRange(usize),

    #[error("bad clump density: {0}")]
    BadDensity(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
