use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("{0}")]
    Parse(String),

    #[error("model file line {line}: {message}")]
    Model { line: usize, message: String },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("training failed: {0}")]
    Training(String),
}

impl CliError {
    /// Process exit status for this class of failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Io(_) => 3,
            CliError::Parse(_) => 4,
            CliError::Model { .. } => 5,
            CliError::Dimension(_) => 6,
            CliError::Training(_) => 7,
        }
    }
}

impl From<netlines_core::Error> for CliError {
    fn from(e: netlines_core::Error) -> Self {
        use netlines_core::Error as E;
        match e {
            E::Io(m) => CliError::Io(m),
            E::Parse { .. } => CliError::Parse(e.to_string()),
            E::DimensionMismatch { .. } => CliError::Dimension(e.to_string()),
            E::InvalidConfig(_) | E::NOutOfRange(_) | E::BadDensity(_) => {
                CliError::Usage(e.to_string())
            }
            other => CliError::Training(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
