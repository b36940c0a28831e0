use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("degenerate triple: {0}")]
    DegenerateTriple(String),
    #[error("no isometry exists: {0}")]
    NoIsometry(String),
    #[error("gluing impossible on face pair {face}: {detail}")]
    GluingImpossible { face: usize, detail: String },
    #[error("degenerate face pair {face}: {detail}")]
    DegenerateFace { face: usize, detail: String },
    #[error("convention violation: {0}")]
    Convention(String),
    #[error("numerical failure: {0}")]
    Numeric(String),
    #[error("decode error: {0}")]
    Decode(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn contract<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Contract(msg.into()))
}
