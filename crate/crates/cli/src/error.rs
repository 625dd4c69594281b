use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] z3tc::Error),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("check failed: {0}")]
    Failed(String),
}

impl CliError {
    /// 2 for bad input, 3 for a violated invariant or a failed check.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Core(z3tc::Error::Invariant(_)) | CliError::Failed(_) => 3,
            CliError::Core(_) => 2,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Config("x".into()).exit_code(), 2);
        assert_eq!(CliError::Core(z3tc::Error::InvalidLattice("x".into())).exit_code(), 2);
        assert_eq!(CliError::Core(z3tc::Error::Invariant("x".into())).exit_code(), 3);
        assert_eq!(CliError::Failed("x".into()).exit_code(), 3);
    }
}
