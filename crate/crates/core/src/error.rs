use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("value out of domain: {0}")]
    Domain(String),
    #[error("signer state exhausted: all {0} tags used")]
    StateExhausted(u64),
    #[error("trapdoor sampling failed after {0} attempts")]
    SamplingFailed(usize),
    #[error("witness rejected: {0}")]
    WitnessRejected(String),
    #[error("extraction failed: {0}")]
    Extraction(String),
    #[error("user public key already enrolled at index {0}")]
    DuplicateUser(u64),
    #[error("group signature does not verify")]
    InvalidSignature,
    #[error("malformed encoding: {0}")]
    Malformed(String),
    #[error("linear system has no solution: {0}")]
    Unsolvable(String),
}

pub type Result<T> = std::result::Result<T, Error>;
