use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("unknown scenario {0:?}")]
    UnknownScenario(String),

    #[error("empty sample")]
    EmptySample,

    #[error("replicate {replicate}: {source}")]
    Frontend {
        replicate: usize,
        #[source]
        source: kacrice::Error,
    },

    #[error("replicate {replicate}: every one of {attempts} draws tied at the maximum")]
    TooManyTies { replicate: usize, attempts: usize },

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error(transparent)]
    Core(#[from] kacrice::Error),

    #[error("{0}")]
    Io(String),

    #[error("{0}")]
    Usage(String),
}

impl HarnessError {
    /// Input errors map to exit code 2, the rest to 3.
    pub fn is_input_error(&self) -> bool {
        match self {
            HarnessError::UnknownScenario(_)
            | HarnessError::EmptySample
            | HarnessError::InvalidScenario(_)
            | HarnessError::Io(_)
            | HarnessError::Usage(_) => true,
            HarnessError::Frontend { source, .. } => source.is_input_error(),
            HarnessError::Core(e) => e.is_input_error(),
            HarnessError::TooManyTies { .. } => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;
