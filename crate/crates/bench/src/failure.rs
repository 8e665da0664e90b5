use std::fmt;

/// Command failure, mapped to a process exit code.
#[derive(Debug)]
pub enum Failure {
    Config(String),
    OracleUnavailable(String),
    /// Recomputed outputs differ from the files on disk.
    Mismatch(String),
    Core(timeblock_core::Error),
    Io(std::io::Error),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Config(_) => 2,
            Failure::OracleUnavailable(_) => 3,
            Failure::Mismatch(_) | Failure::Core(_) | Failure::Io(_) => 1,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Config(m) => write!(f, "config error: {m}"),
            Failure::OracleUnavailable(m) => write!(f, "ground energy unavailable: {m}"),
            Failure::Mismatch(m) => write!(f, "verification failed: {m}"),
            Failure::Core(e) => write!(f, "{e}"),
            Failure::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl std::error::Error for Failure {}

impl From<timeblock_core::Error> for Failure {
    fn from(e: timeblock_core::Error) -> Self {
        match e {
            timeblock_core::Error::OracleUnavailable { .. } => Failure::OracleUnavailable(e.to_string()),
            timeblock_core::Error::Io(io) => Failure::Io(io),
            other => Failure::Core(other),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}
