use serde_json::json;

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("configuration error{}: {message}", field.map(|f| format!(" in `{f}`")).unwrap_or_default())]
    Config { field: Option<&'static str>, message: String },
    #[error(transparent)]
    Core(#[from] acsigma_core::Error),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("{0}")]
    Precondition(String),
}

impl LabError {
    pub fn at(field: &'static str, message: &str) -> Self {
        LabError::Config {
            field: Some(field),
            message: message.to_string(),
        }
    }

    pub fn io(path: &std::path::Path, e: std::io::Error) -> Self {
        LabError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        }
    }

    /// The config field at fault, when there is one.
    pub fn field_name(&self) -> Option<&'static str> {
        match self {
            LabError::Config { field, .. } => *field,
            LabError::Core(acsigma_core::Error::InvalidParameter { field, .. }) => Some(field),
            _ => None,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            LabError::Config { .. } | LabError::Core(acsigma_core::Error::InvalidParameter { .. }) => "config",
            LabError::Core(_) => "numerics",
            LabError::Io { .. } => "io",
            LabError::Precondition(_) => "precondition",
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({ "error": { "kind": self.kind(), "field": self.field_name(), "message": self.to_string() } })
    }
}
