use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config syntax: {0}")]
    Syntax(String),

    #[error("config field `{field}`: {message}")]
    Invalid { field: String, message: String },

    #[error("unknown preset `{0}`; run `feasibility presets` for the list")]
    UnknownPreset(String),

    #[error("{path}: {message}")]
    Io { path: String, message: String },

    #[error(transparent)]
    Numeric(#[from] feasibility::Error),
}

impl CliError {
    pub fn io(path: &std::path::Path, err: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            message: err.to_string(),
        }
    }
}
