use hqrc_core::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// 2 for configuration problems, 3 for numerical failures, 1 for anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 2,
            Self::Core(e) => match e {
                CoreError::Config(_) | CoreError::Argument(_) => 2,
                CoreError::Numerical(_) | CoreError::Solver(_) | CoreError::NoGap(_) | CoreError::Validation(_) => 3,
                CoreError::Io(_) | CoreError::Serde(_) => 1,
            },
            Self::Io(_) | Self::Csv(_) | Self::Json(_) => 1,
        }
    }
}

pub(crate) fn config_err<T>(msg: impl Into<String>) -> Result<T, CliError> {
    Err(CliError::Config(msg.into()))
}
