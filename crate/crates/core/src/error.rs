use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),
    #[error("invalid disorder: {0}")]
    InvalidDisorder(String),
    #[error("unsupported class {0}")]
    UnsupportedClass(String),
    #[error("unknown symmetry class {0:?}")]
    UnknownClass(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("ambiguous classification: {0}")]
    Ambiguous(String),
    #[error("no class matches the supplied symmetries: {0}")]
    Unclassified(String),
    #[error("matrix dimension {n} exceeds the dense cap {cap}")]
    CapExceeded { n: usize, cap: usize },
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Numerical(_) | Error::Ambiguous(_) | Error::Unclassified(_) => 3,
            _ => 2,
        }
    }
}
