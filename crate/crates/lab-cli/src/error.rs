use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] adiabatic_core::Error),
    #[error("{source_name}: {message}")]
    Model { source_name: String, message: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    /// 2 domain or bad input, 3 integration, 4 degeneracy, 5 continuation, 10 I/O.
    pub fn exit_code(&self) -> i32 {
        use adiabatic_core::Error as E;
        match self {
            CliError::Core(E::Integration { .. } | E::NoConvergence { .. }) => 3,
            CliError::Core(E::Degeneracy { .. }) => 4,
            CliError::Core(E::Continuation { .. }) => 5,
            CliError::Core(_) | CliError::Model { .. } | CliError::Usage(_) => 2,
            CliError::Io { .. } => 10,
        }
    }
}
