use thiserror::Error;

/// Errors raised by the channel, Gaussian-state and key-rate modules.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("passivity violated on {segment} segment: largest singular value {singular_value:.6e} > 1")]
    Passivity {
        segment: String,
        singular_value: f64,
    },

    #[error("unphysical symplectic eigenvalue {0:.12e} (< 1)")]
    UnphysicalEigenvalue(f64),

    #[error("contract violated: {0}")]
    Contract(String),

    #[error("configuration error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("secure-distance bracket invalid: {0}")]
    NonBracketing(String),

    #[error("optimizer setup: {0}")]
    Optimizer(String),

    #[error("i/o: {0}")]
    Io(String),
}

impl Error {
    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    /// Process exit code used by the CLI for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } => 2,
            Error::Io(_) => 1,
            _ => 3,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
