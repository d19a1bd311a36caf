use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid region: {0}")]
    InvalidRegion(String),
    #[error("index outside region: {0}")]
    OutOfRegion(String),
    #[error("edge set is not even: vertex {0} has odd degree")]
    NotEven(usize),
    #[error("operation undefined on a torus")]
    TorusUnsupported,
    #[error("configuration has a non-contractible loop; no spin representation exists")]
    NoSpinRepresentation,
    #[error("missing or inconsistent boundary spins: {0}")]
    BoundarySpins(String),
    #[error("enumeration needs 2^{needed} states, above the cap 2^{cap}; use MCMC instead")]
    CapExceeded { needed: u32, cap: u32 },
    #[error("parameter out of range: {0}")]
    Parameter(String),
    #[error("circuit intersects blocked edges")]
    BlockedCircuit,
    #[error("event is not increasing")]
    NotMonotone,
    #[error("no vertex of degree at most five while peeling the loop graph")]
    PeelingFailed,
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
