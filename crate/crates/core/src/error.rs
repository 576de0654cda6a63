use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("class {class} has only {available} samples, {needed} required")]
    ClassTooSmall {
        class: u8,
        available: usize,
        needed: usize,
    },

    #[error("labels contain a single class")]
    SingleClass,

    #[error("degenerate pairing: all differences are zero")]
    DegeneratePairing,

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
