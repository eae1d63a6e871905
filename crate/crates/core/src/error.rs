use thiserror::Error;

/// Errors raised by every fallible operation in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invalid manifold specification: {0}")]
    InvalidSpec(String),
    #[error("Bessel argument {x} outside supported domain (order {order})")]
    BesselDomain { order: u32, x: f64 },
    #[error("failed to bracket Bessel root (order {order}, rank {rank}) in [{lo}, {hi}]")]
    BracketFailure { order: u32, rank: u32, lo: f64, hi: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("fields belong to different bases")]
    BasisMismatch,
    #[error("quadrature under-resolved: exactness {have} below required {need}")]
    UnderResolved { have: f64, need: f64 },
    #[error("field has support outside band [{lo}, {hi}]")]
    OutOfBand { lo: f64, hi: f64 },
    #[error("band [{lo}, {hi}] contains no modes")]
    EmptyBand { lo: f64, hi: f64 },
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
    #[error("blow-up at t = {t}: L2 norm {norm}")]
    BlowUp { t: f64, norm: f64 },
    #[error("not converged: {0}")]
    NotConverged(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
