use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("unknown state {0:?}")]
    UnknownState(String),

    #[error("state {0:?} is not live in this model")]
    NotLive(String),

    #[error("successor subset is not contained in the successor domain (index {index}, domain size {size})")]
    OutsideDomain { index: usize, size: usize },

    #[error("successor domain of size {size} exceeds the enumeration cap {cap}")]
    SupportCapExceeded { size: usize, cap: usize },

    #[error("model has no priority function")]
    MissingPriorities,

    #[error("policy picks action {action:?} which is not admissible at state {state:?}")]
    InadmissibleAction { state: String, action: String },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid benchmark parameters: {0}")]
    InvalidSpec(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("time limit exceeded")]
    Timeout,

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
