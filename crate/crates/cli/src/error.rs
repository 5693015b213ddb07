use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("solver failure: {message}; manifest: {}", manifest.display())]
    Solver { message: String, manifest: PathBuf },
    #[error("{0}")]
    Core(#[from] largesol::Error),
}

impl CliError {
    pub fn is_broken_pipe(&self) -> bool {
        matches!(self, CliError::Core(largesol::Error::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe)
    }

    pub fn exit_code(&self) -> u8 {
        use largesol::Error as E;
        match self {
            CliError::Usage(_) => 2,
            CliError::Verification(_) => 1,
            CliError::Solver { .. } => 3,
            CliError::Core(e) => match e {
                E::Parse(_)
                | E::InvalidDomain(_)
                | E::InvalidParameter(_)
                | E::BadExponent(_)
                | E::EmptyDomain
                | E::OutsideDomain(..)
                | E::BadSupport
                | E::MeshMismatch
                | E::Io(_) => 2,
                _ => 3,
            },
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Core(largesol::Error::Io(e))
    }
}
