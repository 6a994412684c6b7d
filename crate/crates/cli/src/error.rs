use thiserror::Error;

/// Process exit statuses.
pub mod exit {
    pub const CONVERGED: u8 = 0;
    pub const CALL_BUDGET: u8 = 2;
    pub const ENRICHMENT_BUDGET: u8 = 3;
    pub const CONFIG: u8 = 64;
    pub const MODEL: u8 = 70;
    pub const IO: u8 = 74;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("model error: {0}")]
    Model(String),

    #[error("run failed: {0}")]
    Engine(#[from] sbalc_core::Error),

    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Config(_) => exit::CONFIG,
            Self::Model(_) | Self::Engine(_) => exit::MODEL,
            Self::Io(_) => exit::IO,
        }
    }
}
