use thiserror::Error;

/// Failure classes; each maps to one process exit code.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("simulation failure: {0}")]
    Simulation(String),
    #[error("{0} acceptance criteria failed")]
    Acceptance(usize),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Simulation(_) => 2,
            CliError::Acceptance(_) => 3,
        }
    }

    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn simulation(msg: impl Into<String>) -> Self {
        CliError::Simulation(msg.into())
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Errors raised while building schedules and inputs count as config errors.
pub(crate) fn setup(e: spinchain::Error) -> CliError {
    CliError::Config(e.to_string())
}

pub(crate) fn sim(e: spinchain::Error) -> CliError {
    CliError::Simulation(e.to_string())
}

pub(crate) fn io(path: &std::path::Path, e: std::io::Error) -> CliError {
    CliError::Simulation(format!("{}: {e}", path.display()))
}
