use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("config error on line {line}: {msg}")]
    ConfigLine { line: usize, msg: String },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("output error: {0}")]
    Output(String),
    #[error(transparent)]
    Core(#[from] polariton_core::Error),
}

impl CliError {
    pub fn config_at(line: usize, msg: impl Into<String>) -> Self {
        Self::ConfigLine { line, msg: msg.into() }
    }

    /// Process exit status for this error.
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Config(_) | Self::ConfigLine { .. } => 2,
            Self::Core(polariton_core::Error::ResourceCap { .. })
            | Self::Core(polariton_core::Error::DimensionOverflow { .. }) => 4,
            Self::Core(polariton_core::Error::InvalidParams(_) | polariton_core::Error::InvalidConfig(_)) => 2,
            Self::Io(_) | Self::Output(_) | Self::Core(_) => 3,
        }
    }
}
