use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] uavsec::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    /// Process exit status: 2 for configuration problems, 3 for an
    /// infeasible optimization, 4 for a quadrature accuracy failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Core(uavsec::Error::Infeasible { .. }) => 3,
            CliError::Core(uavsec::Error::Accuracy { .. }) => 4,
            CliError::Core(uavsec::Error::InvalidParams(_) | uavsec::Error::Domain { .. }) => 2,
            CliError::Core(_) | CliError::Io(_) | CliError::Csv(_) => 1,
        }
    }

    /// Short machine-friendly name printed with the message.
    pub fn kind(&self) -> &'static str {
        match self.exit_code() {
            2 => "config",
            3 => "infeasible",
            4 => "accuracy",
            _ => "runtime",
        }
    }
}
