use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("cluster {cluster} out of range (layout has {clusters} clusters)")]
    ClusterOutOfRange { cluster: usize, clusters: usize },
    #[error("value {value} outside alphabet [0, {max}]")]
    OutOfAlphabet { value: u64, max: u64 },
    #[error("empty dataset")]
    EmptyDataset,
    #[error("weight vector has zero norm")]
    ZeroNorm,
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("integer overflow during exact elimination")]
    Overflow,
    #[error("retry budget exhausted after {attempts} attempts: {reason}")]
    RetriesExhausted { attempts: usize, reason: String },
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
