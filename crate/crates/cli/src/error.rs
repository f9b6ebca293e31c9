use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("input error: {0}")]
    Input(String),
    #[error("enumeration budget of {0} states exceeded")]
    Budget(u64),
    #[error("internal invariant failure: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Budget(_) => 3,
            CliError::Internal(_) => 4,
        }
    }

    pub(crate) fn input(msg: impl Into<String>) -> Self {
        CliError::Input(msg.into())
    }
}

impl From<measure_audit::Error> for CliError {
    fn from(e: measure_audit::Error) -> Self {
        match e {
            measure_audit::Error::BudgetExceeded { limit } => CliError::Budget(limit),
            other => CliError::Input(other.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
