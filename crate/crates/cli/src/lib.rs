//! Library side of the `mfdfa` command: configuration, the end-to-end
//! pipeline, the JSON report and the plot-data writers.

pub mod config;
pub mod pipeline;
pub mod plot;
pub mod report;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("no input series found")]
    NoInputs,
    #[error(transparent)]
    Core(#[from] mfdfa::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// 2 for a bad configuration or missing inputs, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::NoInputs => 2,
            _ => 1,
        }
    }
}
