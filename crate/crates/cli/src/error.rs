use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] maxcop::Error),

    #[error("no model in the grid could be fitted")]
    AllFitsFailed,

    #[error("cannot write output: {0}")]
    Output(#[from] std::io::Error),
}

impl CliError {
    /// 2 for configuration errors, 3 for data errors, 4 when fitting failed.
    pub fn exit_code(&self) -> i32 {
        use maxcop::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::AllFitsFailed => 4,
            CliError::Output(_) => 1,
            CliError::Core(e) => match e {
                E::ParameterDomain(_) | E::Domain(_) | E::Unsupported(_) => 2,
                E::Data { .. } | E::Io(_) | E::Csv(_) | E::InsufficientData(_) => 3,
                E::Optimization { .. } => 4,
                _ => 1,
            },
        }
    }
}

pub fn config(message: impl Into<String>) -> CliError {
    CliError::Config(message.into())
}
