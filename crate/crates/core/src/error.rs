use thiserror::Error;

/// Errors produced by the detection library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid modulation order {0}: expected 2 (BPSK) or an even power of two")]
    InvalidOrder(usize),

    #[error("bit vector of length {len} is not a multiple of {bits_per_symbol} bits per symbol")]
    BitLength { len: usize, bits_per_symbol: usize },

    #[error("symbol {re}{im:+}i is not a point of the {order}-ary alphabet")]
    OffAlphabet { re: f64, im: f64, order: usize },

    #[error("non-finite value {0}")]
    NonFinite(f64),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("channel matrix is rank deficient (rank {rank} < {cols})")]
    SingularChannel { rank: usize, cols: usize },

    #[error("search space of {order}^{n} candidates exceeds the node budget of {budget}")]
    SearchBudget { order: usize, n: usize, budget: u64 },

    #[error("sphere decoder visited more than {0} nodes")]
    NodeBudget(u64),

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid experiment plan: {0}")]
    Plan(String),

    #[error("I/O error: {0}")]
    Io(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
