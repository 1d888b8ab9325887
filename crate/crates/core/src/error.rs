use thiserror::Error;

/// Errors raised anywhere in the runtime.
#[derive(Debug, Error)]
pub enum CortexError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("position {position} exceeds capacity {limit}")]
    Capacity { position: usize, limit: usize },

    #[error("topology violation: {0}")]
    Topology(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("sequencing violation: {0}")]
    Sequencing(String),

    #[error("synapse is empty: no snapshot has been pushed yet")]
    EmptySynapse,

    #[error("stream agent cap of {cap} reached")]
    AgentCap { cap: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = CortexError> = std::result::Result<T, E>;
