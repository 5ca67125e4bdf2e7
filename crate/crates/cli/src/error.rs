use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] mpgfrft::Error),

    #[error("invalid configuration: {0}")]
    Config(String),
}

impl CliError {
    /// Machine-readable kind reported in the JSON error object.
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.kind(),
            CliError::Config(_) => "invalid-config",
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({ "error": self.kind(), "message": self.to_string() })
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
