use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] fractal_kuramoto::Error),

    #[error("{source}; {hint}")]
    Hint {
        source: fractal_kuramoto::Error,
        hint: String,
    },

    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },

    #[error("{0}")]
    Json(#[from] serde_json::Error),

    #[error("{0}")]
    Usage(String),

    #[error("{0}")]
    Verification(String),

    #[error("{0}")]
    Unresolved(String),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Core(e) | CliError::Hint { source: e, .. } => e.kind(),
            CliError::Io { .. } => "io",
            CliError::Json(_) => "json",
            CliError::Usage(_) => "usage",
            CliError::Verification(_) => "verification-failed",
            CliError::Unresolved(_) => "unresolved-winding",
        }
    }

    /// `error: <kind>: <message>` on a single line.
    pub fn line(&self) -> String {
        let flat = self.to_string().split_whitespace().collect::<Vec<_>>().join(" ");
        format!("error: {}: {flat}", self.kind())
    }
}
