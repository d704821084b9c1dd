use thiserror::Error;

/// Input and validation failures; all map to exit status 2.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Parse {
        path: String,
        #[source]
        source: serde_json::Error,
    },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("FRAMEMUL_TOL: {0}")]
    Tolerance(framemul::Error),
    #[error(transparent)]
    Core(#[from] framemul::Error),
    #[error("{0}")]
    Usage(String),
}
