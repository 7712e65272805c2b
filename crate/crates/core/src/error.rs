use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("backend mismatch: {0}")]
    Backend(String),
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("graph is not strongly connected")]
    NotStronglyConnected,
    #[error("zero-measure set")]
    ZeroMeasure,
    #[error("balls are not pairwise disjoint")]
    NotDisjoint,
    #[error("specification spacing violated at segment {0}")]
    Spacing(usize),
    #[error("no connecting path of length {len} from {from} to {to}")]
    Connector { from: u8, to: u8, len: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
