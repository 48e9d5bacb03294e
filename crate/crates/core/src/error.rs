use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown vertex id {0}")]
    UnknownVertex(usize),

    #[error("qdimacs line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid game: {0}")]
    InvalidGame(String),

    #[error("illegal move: {0}")]
    IllegalMove(String),

    #[error("partial assignment has length {len}, expected {expected} parity")]
    Parity { len: usize, expected: &'static str },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("position is not won by the side to move")]
    NotWon,

    #[error("state space of {estimate} keys exceeds budget {budget}")]
    Infeasible { estimate: u128, budget: u128 },

    #[error("reduction rejected: {0}")]
    Reduction(String),

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
