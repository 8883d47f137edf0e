use std::path::PathBuf;

/// Errors surfaced by the lab, grouped by exit code.
#[derive(Debug, thiserror::Error)]
pub enum LabError {
    /// Invalid configuration; `path` is a JSON pointer into the document.
    #[error("config error at {path}: {message}")]
    Config { path: String, message: String },

    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },

    #[error("{file}:{line}: {message}")]
    Format { file: String, line: usize, message: String },

    #[error("export error: {0}")]
    Export(String),

    #[error(transparent)]
    Core(#[from] mmdlab_core::Error),

    #[error("internal error: {0}")]
    Internal(String),
}

pub type LabResult<T> = Result<T, LabError>;

impl LabError {
    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        LabError::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        LabError::Io { path: path.into(), source }
    }

    /// 2 for anything the user can fix in the inputs, 3 otherwise.
    pub fn exit_code(&self) -> i32 {
        use mmdlab_core::Error as E;
        match self {
            LabError::Config { .. } | LabError::Io { .. } | LabError::Format { .. } | LabError::Export(_) => 2,
            LabError::Core(E::InvalidArgument(_) | E::InvalidVertex { .. } | E::ResourceLimit { .. } | E::Validation(_)) => 2,
            LabError::Core(_) | LabError::Internal(_) => 3,
        }
    }
}

/// Deserializes JSON, reporting failures with the JSON pointer of the
/// offending value.
pub fn from_json<T: serde::de::DeserializeOwned>(text: &str) -> LabResult<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let pointer = pointer_of(e.path());
        LabError::config(pointer, e.into_inner().to_string())
    })
}

/// Same as [`from_json`] for an already parsed value.
pub fn from_value<T: serde::de::DeserializeOwned>(value: serde_json::Value) -> LabResult<T> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let pointer = pointer_of(e.path());
        LabError::config(pointer, e.into_inner().to_string())
    })
}

fn pointer_of(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for seg in path.iter() {
        out.push('/');
        match seg {
            Segment::Seq { index } => out.push_str(&index.to_string()),
            Segment::Map { key } | Segment::Enum { variant: key } => out.push_str(&key.replace('~', "~0").replace('/', "~1")),
            Segment::Unknown => out.push('?'),
        }
    }
    if out.is_empty() {
        out.push('/');
    }
    out
}
