use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("DivisionByZero: attempted to invert zero")]
    DivisionByZero,
    #[error("WindowUnderflow: {0}")]
    WindowUnderflow(String),
    #[error("IllFormedProduct: {0}")]
    IllFormedProduct(String),
    #[error("SectorViolation: {0}")]
    SectorViolation(String),
    #[error("UncertifiedPair: no passing commutativity certificate for ({0}, {1})")]
    UncertifiedPair(String, String),
    #[error("CapacityExceeded: {0}")]
    CapacityExceeded(String),
    #[error("HypothesisViolated: {0}")]
    HypothesisViolated(String),
    #[error("InvalidLevel: level must be a nonzero rational, got {0}")]
    InvalidLevel(String),
    #[error("OutOfTruncation: degree {degree} exceeds cutoff {cutoff} in sector {sector}")]
    OutOfTruncation {
        sector: String,
        degree: String,
        cutoff: String,
    },
    #[error("Config: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn is_out_of_truncation(&self) -> bool {
        matches!(self, Error::OutOfTruncation { .. })
    }
}
