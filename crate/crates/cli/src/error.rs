use std::path::PathBuf;

use thiserror::Error;

/// Failure of a `qmg` invocation, mapped onto the process exit status.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("invalid value at `{path}`: {message}")]
    Validation { path: String, message: String },
    #[error("numerical failure in {module}: {source}")]
    Numerical {
        module: &'static str,
        #[source]
        source: qmg_core::Error,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Io { .. } => 1,
            Self::Parse { .. } => 2,
            Self::Validation { .. } => 3,
            Self::Numerical { .. } => 4,
        }
    }

    pub(crate) fn invalid(path: impl Into<String>, message: impl ToString) -> Self {
        Self::Validation { path: path.into(), message: message.to_string() }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io { path: path.into(), source }
    }
}

/// Attaches the module name to core errors raised during computation.
pub(crate) trait InModule<T> {
    fn in_module(self, module: &'static str) -> Result<T, CliError>;
    fn at(self, path: &str) -> Result<T, CliError>;
}

impl<T> InModule<T> for qmg_core::Result<T> {
    fn in_module(self, module: &'static str) -> Result<T, CliError> {
        self.map_err(|source| CliError::Numerical { module, source })
    }

    fn at(self, path: &str) -> Result<T, CliError> {
        self.map_err(|e| CliError::invalid(path, e))
    }
}
