use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension {0} is not an odd prime")]
    InvalidDimension(u32),
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: u32, right: u32 },
    #[error("arity mismatch: {left} vs {right} qudits")]
    ArityMismatch { left: usize, right: usize },
    #[error("qudit index {index} out of range for {n} qudits")]
    TargetOutOfRange { index: usize, n: usize },
    #[error("invalid gate targets: {0}")]
    InvalidTargets(String),
    #[error("observable does not satisfy W^d = 1")]
    NotUnitOrder,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("classical register {0} read before it is written")]
    CregUnwritten(usize),
    #[error("classical register {index} out of range ({n} registers)")]
    CregOutOfRange { index: usize, n: usize },
    #[error("malformed conditional: {0}")]
    MalformedCondition(String),
    #[error("invalid noise channel: {0}")]
    InvalidNoise(String),
    #[error("state too large for dense simulation: {0} amplitudes")]
    SizeOverflow(usize),
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),
    #[error("invalid path: {0}")]
    InvalidPath(String),
    #[error("invalid ordering: {0}")]
    InvalidOrdering(String),
    #[error("invalid defect: {0}")]
    InvalidDefect(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("basis mismatch: {0}")]
    BasisMismatch(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("serialization: {0}")]
    Serde(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serde(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
