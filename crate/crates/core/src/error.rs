use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit count must be even and positive, got {0}")]
    OddQubitCount(usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("cannot parse Pauli string {0:?}")]
    ParsePauli(String),
    #[error("MPS shape mismatch: {0}")]
    Shape(String),
    #[error("invalid stabilizer generators: {0}")]
    InvalidStabilizer(String),
    #[error("state has {k} generators on {n} qubits; only pure states are supported")]
    MixedState { k: usize, n: usize },
    #[error("bond dimension {bond} exceeds the configured cap {cap}")]
    BondCap { bond: usize, cap: usize },
    #[error("the identity Pauli has no shadow norm")]
    IdentityPauli,
    #[error("observable has no non-identity terms")]
    TrivialObservable,
    #[error("inverse MPS required but not supplied")]
    MissingInverse,
    #[error("inverse is not heralded: epsilon {0:e}")]
    NotHeralded(f64),
    #[error("block count {k} does not divide {len} values")]
    BlockCount { k: usize, len: usize },
    #[error("local system is singular: residual {0:e}")]
    SingularSystem(f64),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("invalid record: {0}")]
    Record(String),
    #[error("cache file: {0}")]
    Cache(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
