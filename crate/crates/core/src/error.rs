use thiserror::Error;

/// Failure to read a system or Petri net description.
#[derive(Debug, Error)]
pub enum LoadError {
    #[error("line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("{}{location}: {message}", line.map(|l| format!("line {l}, ")).unwrap_or_default())]
    Invalid { location: String, line: Option<usize>, message: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl LoadError {
    pub(crate) fn from_json(e: serde_json::Error) -> Self {
        LoadError::Syntax { line: e.line(), column: e.column(), message: e.to_string() }
    }

    /// A semantic error; the line is recovered from the `(id "...")` part of `location`.
    pub(crate) fn invalid(text: &str, location: String, message: String) -> Self {
        let line = location.split_once("(id \"").and_then(|(_, rest)| rest.split_once('"')).and_then(|(id, _)| {
            let needle = format!("\"{id}\"");
            text.lines().position(|l| l.contains("\"id\"") && l.contains(&needle)).map(|i| i + 1)
        });
        LoadError::Invalid { location, line, message }
    }
}
