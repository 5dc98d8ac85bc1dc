use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("singular kernel evaluation: probe ({r}, {z}) coincides with a source and delta = 0")]
    Singular { r: f64, z: f64 },

    #[error("step rejected: dt = {dt} exceeds the admissible {admissible}")]
    StepRejected { dt: f64, admissible: f64 },

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("parse error in {path}: {msg}")]
    Parse { path: PathBuf, msg: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
