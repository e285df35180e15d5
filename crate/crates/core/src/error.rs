use thiserror::Error;

/// Errors raised by the laboratory.
///
/// `Config` and `Validation` are caller mistakes; everything else is a
/// numerical failure that carries enough context to be reported as JSON.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("invalid input: {0}")]
    Validation(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("singularity: {0}")]
    Singular(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("accuracy target missed: {message}")]
    Accuracy {
        message: String,
        diagnostics: serde_json::Value,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by bad configuration or malformed input.
    pub fn is_usage(&self) -> bool {
        matches!(self, Error::Config(_) | Error::Validation(_))
    }

    /// JSON rendering used by the experiment runner for diagnostics.
    pub fn to_json(&self) -> serde_json::Value {
        let kind = match self {
            Error::Config(_) => "config",
            Error::Validation(_) => "validation",
            Error::Domain(_) => "domain",
            Error::Singular(_) => "singularity",
            Error::Numerical(_) => "numerical",
            Error::Accuracy { .. } => "accuracy",
            Error::Io(_) => "io",
        };
        let mut v = serde_json::json!({ "kind": kind, "message": self.to_string() });
        if let Error::Accuracy { diagnostics, .. } = self {
            v["diagnostics"] = diagnostics.clone();
        }
        v
    }
}

pub type Result<T> = std::result::Result<T, Error>;
