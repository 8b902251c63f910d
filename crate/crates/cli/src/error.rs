use chiplet_place::Error;

/// Process exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;
pub const EXIT_DEADLOCK: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("runtime error: {0}")]
    Runtime(String),
    #[error("placement deadlock: {0}")]
    Deadlock(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Runtime(_) => EXIT_RUNTIME,
            CliError::Deadlock(_) => EXIT_DEADLOCK,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::Config { .. } | Error::ChipletTooLarge { .. } | Error::Format { .. } => CliError::Config(msg),
            Error::PlacementDeadlock { .. } | Error::NoLegalLayout(_) => CliError::Deadlock(msg),
            Error::Io { ref source, .. } if source.kind() == std::io::ErrorKind::NotFound => CliError::Config(msg),
            _ => CliError::Runtime(msg),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub(crate) fn io_err(path: &std::path::Path, e: std::io::Error) -> CliError {
    CliError::Runtime(format!("{}: {e}", path.display()))
}
