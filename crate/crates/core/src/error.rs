use std::io;

use thiserror::Error;

use crate::hsf::Label;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),

    #[error("bad magic: expected \"HSF1\", found {found:?}")]
    BadMagic { found: Vec<u8> },

    #[error("truncated header: need {expected} bytes, file has {actual}")]
    TruncatedHeader { expected: usize, actual: usize },

    #[error("invalid header: {0}")]
    InvalidHeader(String),

    #[error("unknown group label {0:?} (expected one of A, B, D, C)")]
    UnknownLabel(String),

    #[error("shape mismatch: header implies {expected} data bytes, found {actual}")]
    ShapeMismatch { expected: usize, actual: usize },

    #[error("non-finite value {value} at group {group}, layer {layer}, token {token}, dim {dim}")]
    NonFinite {
        value: f32,
        group: usize,
        layer: usize,
        token: usize,
        dim: usize,
    },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimMismatch { expected: usize, actual: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("missing group with label {0}")]
    MissingLabel(Label),

    #[error("layer {layer} out of range (layer_count {layer_count})")]
    LayerOutOfRange { layer: usize, layer_count: usize },

    #[error("zero-norm vector at index {0}: cosine undefined")]
    ZeroNorm(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("map diverged at step {step} (value {value})")]
    Diverged { step: usize, value: f64 },

    #[error("trajectory too short: {len} symbols, need at least {min}")]
    TooShort { len: usize, min: usize },

    #[error("duplicate turn {turn_index} in conversation {conversation_id}")]
    DuplicateTurn { conversation_id: String, turn_index: u32 },

    #[error("turn indices not increasing in conversation {0}")]
    UnorderedTurns(String),

    #[error("unknown role {0:?}")]
    UnknownRole(String),

    #[error("model did not converge after {iterations} iterations: {reason}")]
    NonConvergence { iterations: usize, reason: String },

    #[error("singular design: {0}")]
    Singular(String),

    #[error("unknown session {0}")]
    UnknownSession(String),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}
