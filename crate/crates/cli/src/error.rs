use entbuffer_core::Error as CoreError;
use thiserror::Error;

pub type Result<T, E = CliError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("verification failed: {0}")]
    Verify(String),

    #[error("{0}")]
    Degenerate(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// 0 ok, 1 verification failure, 2 config error, 3 runtime degenerate.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Verify(_) => 1,
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Degenerate(_) => 3,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Domain(_)
            | CoreError::NotPurifiable(_)
            | CoreError::UnknownProtocol(_)
            | CoreError::ProtocolArgs { .. } => CliError::Config(e.to_string()),
            CoreError::DegenerateProtocol(_)
            | CoreError::DegenerateSystem(_)
            | CoreError::NonConstantSuccess
            | CoreError::InsufficientSamples { .. } => CliError::Degenerate(e.to_string()),
        }
    }
}

pub(crate) fn config(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}
