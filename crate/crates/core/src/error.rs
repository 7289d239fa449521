use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("coupling {coupling} outside [0, {limit}) for a {dim}D lattice")]
    CouplingOutOfRange { coupling: f64, limit: f64, dim: usize },

    #[error("linear size {0} is too small, need at least 3")]
    LatticeTooSmall(usize),

    #[error("lattice dimension {0} is not supported, expected 1 or 2")]
    UnsupportedDimension(usize),

    #[error("smallest potential eigenvalue {0:e} is numerically critical")]
    NearCritical(f64),

    #[error("matrix function is not finite at eigenvalue {0}")]
    NonFiniteFunction(f64),

    #[error("inverse temperature must be positive, got {0}")]
    InvalidBeta(f64),

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("{0} is not positive definite")]
    NotPositiveDefinite(&'static str),

    #[error("dimension mismatch: {0} vs {1} modes")]
    DimensionMismatch(usize, usize),

    #[error("mode index {index} out of range for {modes} modes")]
    IndexOutOfRange { index: usize, modes: usize },

    #[error("mode index {0} appears more than once")]
    DuplicateIndex(usize),

    #[error("mode selection is empty")]
    EmptySelection,

    #[error("state is not physical: symplectic eigenvalue squared {0} is below 1")]
    Unphysical(f64),

    #[error("eigensolver failed: {0}")]
    Eigensolver(String),

    #[error("block size {size} does not fit a lattice of linear size {linear_size}")]
    BlockTooLarge { size: usize, linear_size: usize },

    #[error("{layers} layers leave an empty core in a block of size {size}")]
    EmptyCore { layers: usize, size: usize },

    #[error("padding by {pad} layers does not fit: padded size {padded} vs linear size {linear_size}")]
    PaddingTooLarge { pad: usize, padded: usize, linear_size: usize },

    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("abscissa must be strictly increasing")]
    UnsortedAbscissa,

    #[error("two-point function does not decay (fitted slope {0})")]
    NonDecaying(f64),

    #[error("Fock oracle supports 1 or 2 modes, got {0}")]
    OracleModes(usize),

    #[error("Fock cutoff {0} is too small, need at least 10")]
    CutoffTooSmall(usize),

    #[error("Fock cutoff {cutoff}: top-level occupation weight {weight:e} exceeds 1e-8")]
    TruncationWeight { cutoff: usize, weight: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
